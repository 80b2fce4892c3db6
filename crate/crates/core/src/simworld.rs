//! Deterministic 2-D corridor world and 16-beam sonar ring.
//!
//! A world is a set of line segments plus a scripted polyline path that the
//! robot follows at a fixed offset from a wall. Scans are raycast against the
//! sonar-visible segments, clamped at the sensor range, and inverted so that
//! near returns give inputs close to one.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SONAR_BEAMS: usize = 16;
pub const SONAR_MAX_RANGE: f64 = 4.0;
pub const BEAM_SPACING: f64 = 2.0 * PI / SONAR_BEAMS as f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut a = theta.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Radians in `(-pi, pi]`.
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_angle(heading),
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// What a segment represents. Door-like tags define the door regions used by
/// the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentTag {
    Wall,
    Door,
    Crack,
    /// Below sonar height: never returns an echo.
    Box,
    /// Present only while `door_open` is false.
    ClosedDoor,
    /// Present only while `door_open` is true.
    OpenDoor,
}

impl SegmentTag {
    pub fn is_door(self) -> bool {
        matches!(
            self,
            SegmentTag::Door | SegmentTag::ClosedDoor | SegmentTag::OpenDoor
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SegmentTag::Wall => "wall",
            SegmentTag::Door => "door",
            SegmentTag::Crack => "crack",
            SegmentTag::Box => "box",
            SegmentTag::ClosedDoor => "closed_door",
            SegmentTag::OpenDoor => "open_door",
        }
    }
}

impl FromStr for SegmentTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "wall" => SegmentTag::Wall,
            "door" => SegmentTag::Door,
            "crack" => SegmentTag::Crack,
            "box" => SegmentTag::Box,
            "closed_door" => SegmentTag::ClosedDoor,
            "open_door" => SegmentTag::OpenDoor,
            other => return Err(format!("unknown segment tag {other:?}")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
    pub tag: SegmentTag,
}

impl Segment {
    pub fn new(a: Point, b: Point, tag: SegmentTag) -> Self {
        Self { a, b, tag }
    }

    pub fn length(&self) -> f64 {
        self.b.sub(self.a).norm()
    }

    /// Distance along the ray from `origin` in direction `dir` (unit vector)
    /// to this segment, if they meet at a non-negative ray parameter. Rays
    /// parallel to the segment never hit it.
    pub fn ray_hit(&self, origin: Point, dir: Point) -> Option<f64> {
        let edge = self.b.sub(self.a);
        let denom = dir.cross(edge);
        if denom == 0.0 {
            return None;
        }
        let rel = self.a.sub(origin);
        let t = rel.cross(edge) / denom;
        let u = rel.cross(dir) / denom;
        (t >= 0.0 && (0.0..=1.0).contains(&u)).then_some(t)
    }
}

/// Nearest hit along a ray against any of `segments`, or infinity.
pub fn cast(segments: &[Segment], origin: Point, bearing: f64) -> f64 {
    let dir = Point::new(bearing.cos(), bearing.sin());
    segments
        .iter()
        .filter_map(|s| s.ray_hit(origin, dir))
        .fold(f64::INFINITY, f64::min)
}

/// Inverted, normalised sonar reading for a range in metres.
pub fn invert_range(range: f64) -> f64 {
    1.0 - range.clamp(0.0, SONAR_MAX_RANGE) / SONAR_MAX_RANGE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    /// Metres travelled along the path.
    pub arc_position: f64,
    pub pose: Pose,
    /// Per-beam ranges after clamping to the sensor range (and smoothing,
    /// for samples produced by [`World::walk_path`]).
    pub raw_ranges: [f64; SONAR_BEAMS],
    pub input: [f64; SONAR_BEAMS],
}

impl ScanSample {
    fn from_ranges(arc_position: f64, pose: Pose, ranges: [f64; SONAR_BEAMS]) -> Self {
        let raw_ranges = ranges.map(|r| r.clamp(0.0, SONAR_MAX_RANGE));
        Self {
            arc_position,
            pose,
            raw_ranges,
            input: raw_ranges.map(invert_range),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkOptions {
    pub length: f64,
    pub step: f64,
    /// Moving-average window over consecutive samples; 1 disables smoothing.
    pub smoothing_window: usize,
    /// Half-width of uniform range noise in metres; 0 disables it.
    pub noise_amplitude: f64,
    pub noise_seed: u64,
}

impl Default for WalkOptions {
    fn default() -> Self {
        Self {
            length: 10.0,
            step: 0.1,
            smoothing_window: 3,
            noise_amplitude: 0.0,
            noise_seed: 0,
        }
    }
}

/// An arc-length interval along the path, in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcInterval {
    pub start: f64,
    pub end: f64,
}

impl ArcInterval {
    pub fn contains(&self, s: f64) -> bool {
        self.start <= s && s <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    name: String,
    segments: Vec<Segment>,
    path: Vec<Point>,
    start: Pose,
    params: BTreeMap<String, String>,
}

impl World {
    pub fn new(
        name: impl Into<String>,
        segments: Vec<Segment>,
        path: Vec<Point>,
        start: Pose,
        params: BTreeMap<String, String>,
    ) -> Result<Self> {
        let world = Self {
            name: name.into(),
            segments,
            path,
            start,
            params,
        };
        world.validate()?;
        Ok(world)
    }

    fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidWorld("world has no segments".into()));
        }
        for (i, s) in self.segments.iter().enumerate() {
            let coords = [s.a.x, s.a.y, s.b.x, s.b.y];
            if coords.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidWorld(format!(
                    "segment {i} has non-finite coordinates"
                )));
            }
            if s.length() == 0.0 {
                return Err(Error::InvalidWorld(format!("segment {i} has zero length")));
            }
        }
        if self
            .path
            .iter()
            .any(|p| !(p.x.is_finite() && p.y.is_finite()))
        {
            return Err(Error::InvalidWorld("path has non-finite vertices".into()));
        }
        if ![self.start.x, self.start.y, self.start.heading]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::InvalidWorld("start pose is not finite".into()));
        }
        self.door_open()?;
        self.door_margin()?;
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Every segment in the file, including ones the sonar cannot see.
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn path(&self) -> &[Point] {
        &self.path
    }

    pub fn start(&self) -> Pose {
        self.start
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    pub fn params(&self) -> &BTreeMap<String, String> {
        &self.params
    }

    pub fn door_open(&self) -> Result<bool> {
        match self.param("door_open") {
            None => Ok(false),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(other) => Err(Error::InvalidWorld(format!(
                "door_open must be true or false, got {other:?}"
            ))),
        }
    }

    /// Extra arc length on either side of a door counted as the door region.
    pub fn door_margin(&self) -> Result<f64> {
        match self.param("door_margin") {
            None => Ok(0.0),
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|m| m.is_finite() && *m >= 0.0)
                .ok_or_else(|| Error::InvalidWorld(format!("bad door_margin {v:?}"))),
        }
    }

    fn is_sonar_visible(&self, tag: SegmentTag, door_open: bool) -> bool {
        match tag {
            SegmentTag::Box => false,
            SegmentTag::ClosedDoor => !door_open,
            SegmentTag::OpenDoor => door_open,
            _ => true,
        }
    }

    /// Segments that return sonar echoes in the current configuration.
    pub fn sonar_segments(&self) -> Vec<Segment> {
        let open = self.door_open().unwrap_or(false);
        self.segments
            .iter()
            .copied()
            .filter(|s| self.is_sonar_visible(s.tag, open))
            .collect()
    }

    /// Range in metres along `bearing` from `origin`, or infinity on a miss.
    pub fn raycast(&self, origin: &Pose, bearing: f64) -> f64 {
        cast(&self.sonar_segments(), origin.position(), bearing)
    }

    /// One reading from each beam of the sonar ring, beam `k` pointing at
    /// `heading + k * 22.5 deg`.
    pub fn sonar_scan(&self, pose: &Pose) -> ScanSample {
        self.scan_with(&self.sonar_segments(), pose, 0.0)
    }

    fn scan_ranges(&self, segments: &[Segment], pose: &Pose) -> [f64; SONAR_BEAMS] {
        std::array::from_fn(|k| {
            cast(
                segments,
                pose.position(),
                pose.heading + k as f64 * BEAM_SPACING,
            )
        })
    }

    fn scan_with(&self, segments: &[Segment], pose: &Pose, arc: f64) -> ScanSample {
        ScanSample::from_ranges(arc, *pose, self.scan_ranges(segments, pose))
    }

    pub fn path_length(&self) -> f64 {
        self.path.windows(2).map(|w| w[1].sub(w[0]).norm()).sum()
    }

    /// Pose at arc length `s` along the path. The heading follows the
    /// current leg; at `s = 0` it is the start heading.
    pub fn pose_at(&self, s: f64) -> Result<Pose> {
        let total = self.path_length();
        if self.path.len() < 2 || s > total + 1e-9 {
            return Err(Error::PathTooShort {
                available: total,
                requested: s,
            });
        }
        if s <= 0.0 {
            return Ok(Pose::new(
                self.path[0].x,
                self.path[0].y,
                self.start.heading,
            ));
        }
        let mut remaining = s;
        let legs = self.path.windows(2).filter(|w| w[1].sub(w[0]).norm() > 0.0);
        let mut last = None;
        for w in legs {
            let d = w[1].sub(w[0]);
            let len = d.norm();
            let heading = d.y.atan2(d.x);
            if remaining <= len {
                let f = remaining / len;
                return Ok(Pose::new(w[0].x + f * d.x, w[0].y + f * d.y, heading));
            }
            remaining -= len;
            last = Some((w[1], heading));
        }
        let (end, heading) = last.expect("path has a non-degenerate leg");
        Ok(Pose::new(end.x, end.y, heading))
    }

    /// Arc length of the path point closest to `p`.
    pub fn project_onto_path(&self, p: Point) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        let mut offset = 0.0;
        for w in self.path.windows(2) {
            let d = w[1].sub(w[0]);
            let len2 = d.dot(d);
            if len2 == 0.0 {
                continue;
            }
            let f = (p.sub(w[0]).dot(d) / len2).clamp(0.0, 1.0);
            let q = Point::new(w[0].x + f * d.x, w[0].y + f * d.y);
            let dist = p.sub(q).norm();
            if dist < best.0 {
                best = (dist, offset + f * len2.sqrt());
            }
            offset += len2.sqrt();
        }
        best.1
    }

    /// Arc intervals alongside door-tagged segments, widened by the door
    /// margin and merged where they overlap.
    pub fn door_intervals(&self) -> Vec<ArcInterval> {
        let margin = self.door_margin().unwrap_or(0.0);
        let mut spans: Vec<ArcInterval> = self
            .segments
            .iter()
            .filter(|s| s.tag.is_door())
            .map(|s| {
                let (p, q) = (self.project_onto_path(s.a), self.project_onto_path(s.b));
                ArcInterval {
                    start: p.min(q) - margin,
                    end: p.max(q) + margin,
                }
            })
            .collect();
        spans.sort_by(|a, b| a.start.total_cmp(&b.start));
        let mut merged: Vec<ArcInterval> = Vec::new();
        for span in spans {
            match merged.last_mut() {
                Some(last) if span.start <= last.end => last.end = last.end.max(span.end),
                _ => merged.push(span),
            }
        }
        merged
    }

    pub fn in_door_region(&self, arc: f64) -> bool {
        self.door_intervals().iter().any(|i| i.contains(arc))
    }

    /// Samples the path every `step` metres from 0 to `length` inclusive.
    pub fn walk_path(&self, options: &WalkOptions) -> Result<Vec<ScanSample>> {
        if !(options.step > 0.0 && options.step.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bad step {}",
                options.step
            )));
        }
        if !(options.length >= 0.0 && options.length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bad length {}",
                options.length
            )));
        }
        if options.smoothing_window == 0 {
            return Err(Error::InvalidParameter(
                "smoothing window must be >= 1".into(),
            ));
        }
        if !(options.noise_amplitude >= 0.0 && options.noise_amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bad noise amplitude {}",
                options.noise_amplitude
            )));
        }
        let available = self.path_length();
        if options.length > available + 1e-9 {
            return Err(Error::PathTooShort {
                available,
                requested: options.length,
            });
        }
        let count = (options.length / options.step + 1e-9).floor() as usize + 1;
        let segments = self.sonar_segments();
        let mut rng = ChaCha8Rng::seed_from_u64(options.noise_seed);
        let mut history: Vec<[f64; SONAR_BEAMS]> = Vec::with_capacity(count);
        let mut samples = Vec::with_capacity(count);
        for k in 0..count {
            let arc = k as f64 * options.step;
            let pose = self.pose_at(arc)?;
            let mut ranges = self.scan_ranges(&segments, &pose);
            if options.noise_amplitude > 0.0 {
                for r in ranges.iter_mut() {
                    let n = rng.random_range(-options.noise_amplitude..=options.noise_amplitude);
                    *r = (*r + n).max(0.0);
                }
            }
            history.push(ranges.map(|r| r.min(SONAR_MAX_RANGE)));
            let window = &history[history.len().saturating_sub(options.smoothing_window)..];
            let smoothed = if window.len() == 1 {
                window[0]
            } else {
                std::array::from_fn(|b| {
                    window.iter().map(|r| r[b]).sum::<f64>() / window.len() as f64
                })
            };
            samples.push(ScanSample::from_ranges(arc, pose, smoothed));
        }
        Ok(samples)
    }

    /// Parses the line-oriented world format.
    pub fn parse(name: impl Into<String>, source: &str) -> Result<Self> {
        let mut segments = Vec::new();
        let mut path = Vec::new();
        let mut start = None;
        let mut params = BTreeMap::new();
        for (idx, raw) in source.lines().enumerate() {
            let line_no = idx + 1;
            let err = |message: String| Error::WorldParse {
                line: line_no,
                message,
            };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let nums = |range: std::ops::Range<usize>| -> Result<Vec<f64>> {
                fields[range]
                    .iter()
                    .map(|f| {
                        f.parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .ok_or_else(|| err(format!("expected a number, found {f:?}")))
                    })
                    .collect()
            };
            match fields[0] {
                "segment" => {
                    if !(5..=6).contains(&fields.len()) {
                        return Err(err("segment takes x1 y1 x2 y2 [tag]".into()));
                    }
                    let v = nums(1..5)?;
                    let tag = match fields.get(5) {
                        Some(t) => t.parse().map_err(err)?,
                        None => SegmentTag::Wall,
                    };
                    let s = Segment::new(Point::new(v[0], v[1]), Point::new(v[2], v[3]), tag);
                    if s.length() == 0.0 {
                        return Err(err("segment has zero length".into()));
                    }
                    segments.push(s);
                }
                "path" => {
                    if fields.len() != 3 {
                        return Err(err("path takes x y".into()));
                    }
                    let v = nums(1..3)?;
                    path.push(Point::new(v[0], v[1]));
                }
                "start" => {
                    if fields.len() != 4 {
                        return Err(err("start takes x y heading".into()));
                    }
                    if start.is_some() {
                        return Err(err("duplicate start record".into()));
                    }
                    let v = nums(1..4)?;
                    start = Some(Pose::new(v[0], v[1], v[2]));
                }
                "param" => {
                    if fields.len() != 3 {
                        return Err(err("param takes key value".into()));
                    }
                    params.insert(fields[1].to_string(), fields[2].to_string());
                }
                other => return Err(err(format!("unknown record {other:?}"))),
            }
        }
        let start = match (start, path.first()) {
            (Some(s), _) => s,
            (None, Some(p)) => {
                let heading = path
                    .get(1)
                    .map(|q: &Point| (q.y - p.y).atan2(q.x - p.x))
                    .unwrap_or(0.0);
                Pose::new(p.x, p.y, heading)
            }
            (None, None) => Pose::new(0.0, 0.0, 0.0),
        };
        if path.is_empty() {
            path.push(start.position());
        } else if path[0] != start.position() {
            path.insert(0, start.position());
        }
        Self::new(name, segments, path, start, params)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path, "read world file", e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "world".into());
        Self::parse(name, &text)
    }

    /// Serialises back into the line-oriented format.
    pub fn to_text(&self) -> String {
        let mut out = format!("# world {}\n", self.name);
        for (k, v) in &self.params {
            out.push_str(&format!("param {k} {v}\n"));
        }
        out.push_str(&format!(
            "start {} {} {}\n",
            self.start.x, self.start.y, self.start.heading
        ));
        for p in &self.path {
            out.push_str(&format!("path {} {}\n", p.x, p.y));
        }
        for s in &self.segments {
            out.push_str(&format!(
                "segment {} {} {} {} {}\n",
                s.a.x,
                s.a.y,
                s.b.x,
                s.b.y,
                s.tag.as_str()
            ));
        }
        out
    }
}

const BUILTIN: [(&str, &str); 4] = [
    ("A", include_str!("../worlds/a.world")),
    ("B", include_str!("../worlds/b.world")),
    ("A*", include_str!("../worlds/a_star.world")),
    ("CONTROL", include_str!("../worlds/control.world")),
];

/// Names of the bundled environments.
pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(n, _)| *n)
}

/// One of the bundled environments: `A`, `B`, `A*` or `CONTROL`.
pub fn builtin_world(name: &str) -> Result<World> {
    let key = name.to_ascii_uppercase();
    let key = match key.as_str() {
        "A_STAR" | "ASTAR" => "A*",
        k => k,
    };
    BUILTIN
        .iter()
        .find(|(n, _)| *n == key)
        .map(|(n, src)| World::parse(*n, src))
        .unwrap_or_else(|| Err(Error::UnknownWorld(name.to_string())))
}

/// A bundled world by name, or a world file on disk.
pub fn resolve_world(spec: &str) -> Result<World> {
    match builtin_world(spec) {
        Err(Error::UnknownWorld(_)) => World::load(Path::new(spec)),
        other => other,
    }
}
