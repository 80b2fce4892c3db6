//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

/// Exhaustive argmin of squared distance; first index wins ties.
pub fn brute_force_winner(neurons: &[Vec<f64>], input: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, w) in neurons.iter().enumerate() {
        let d: f64 = w.iter().zip(input).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Forward-Euler integration of tau*dy/dt = alpha*(y0 - y) - s over `dt`
/// using fixed substeps of `h`.
pub fn euler(alpha: f64, y0: f64, tau: f64, mut y: f64, s: f64, dt: f64, h: f64) -> f64 {
    let n = (dt / h).round() as usize;
    for _ in 0..n {
        y += h * (alpha * (y0 - y) - s) / tau;
    }
    y
}

/// Ray/segment intersection computed in the ray's own frame: the ray is
/// rotated onto +x and the segment's crossing of the x axis is found by
/// linear interpolation. Returns `None` when the segment lies on one side of
/// the ray's line, is collinear with it, or crosses behind the origin.
pub fn ray_frame_hit(
    origin: (f64, f64),
    bearing: f64,
    a: (f64, f64),
    b: (f64, f64),
) -> Option<f64> {
    let (s, c) = bearing.sin_cos();
    let local = |p: (f64, f64)| {
        let (dx, dy) = (p.0 - origin.0, p.1 - origin.1);
        (c * dx + s * dy, -s * dx + c * dy)
    };
    let (p, q) = (local(a), local(b));
    if (p.1 > 0.0 && q.1 > 0.0) || (p.1 < 0.0 && q.1 < 0.0) || (p.1 == 0.0 && q.1 == 0.0) {
        return None;
    }
    let x = p.0 + (q.0 - p.0) * (-p.1) / (q.1 - p.1);
    (x >= 0.0).then_some(x)
}

pub type Seg = ((f64, f64), (f64, f64));

/// Nearest hit over all segments, or infinity.
pub fn ray_frame_cast(origin: (f64, f64), bearing: f64, segments: &[Seg]) -> f64 {
    segments
        .iter()
        .filter_map(|&(a, b)| ray_frame_hit(origin, bearing, a, b))
        .fold(f64::INFINITY, f64::min)
}

/// True when the ray passes within `eps` of either endpoint or starts within
/// `eps` of the segment's line: cases where two correct formulations may
/// legitimately disagree about a grazing hit.
pub fn grazing(origin: (f64, f64), bearing: f64, a: (f64, f64), b: (f64, f64), eps: f64) -> bool {
    let (s, c) = bearing.sin_cos();
    let local = |p: (f64, f64)| {
        let (dx, dy) = (p.0 - origin.0, p.1 - origin.1);
        (c * dx + s * dy, -s * dx + c * dy)
    };
    let (p, q) = (local(a), local(b));
    if p.1.abs() < eps || q.1.abs() < eps {
        return true;
    }
    if (p.1 > 0.0) != (q.1 > 0.0) {
        let x = p.0 + (q.0 - p.0) * (-p.1) / (q.1 - p.1);
        return x.abs() < eps;
    }
    false
}
