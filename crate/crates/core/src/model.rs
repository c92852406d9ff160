//! Physical constants, source geometries, and sampled particle paths shared
//! by the field, kernel, and phase-accumulation modules.
//!
//! Everything here is an immutable value after construction and safe to share
//! across worker threads. Constructors validate the invariants (positive
//! geometry parameters, unit axes, strictly increasing timestamps) so the
//! numeric code downstream can assume well-formed inputs.

use crate::math::{plane_basis, Vec3};
use crate::{Error, Result};

/// SI constants anchoring the unit system.
///
/// All fields are overridable so that round-number test universes
/// (ħ = q = 1) are possible; `new` enforces μ₀ε₀c² = 1, which the
/// mode-space/real-space equivalence relies on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant (J·s).
    pub hbar: f64,
    /// Speed of light (m/s).
    pub c: f64,
    /// Vacuum permittivity (F/m).
    pub eps0: f64,
    /// Vacuum permeability (H/m).
    pub mu0: f64,
    /// Elementary charge (C).
    pub e_charge: f64,
}

impl PhysicalConstants {
    /// CODATA 2018 values; μ₀ is derived as 1/(ε₀c²) so the consistency
    /// relation holds to rounding rather than to the measured uncertainty.
    pub fn si() -> Self {
        let c = 299_792_458.0;
        let eps0 = 8.854_187_812_8e-12;
        Self {
            hbar: 1.054_571_817e-34,
            c,
            eps0,
            mu0: 1.0 / (eps0 * c * c),
            e_charge: 1.602_176_634e-19,
        }
    }

    /// Round-number universe with ħ = c = ε₀ = μ₀ = e = 1.
    pub fn natural() -> Self {
        Self { hbar: 1.0, c: 1.0, eps0: 1.0, mu0: 1.0, e_charge: 1.0 }
    }

    pub fn new(hbar: f64, c: f64, eps0: f64, mu0: f64, e_charge: f64) -> Result<Self> {
        let k = Self { hbar, c, eps0, mu0, e_charge };
        for (name, v) in [
            ("hbar", hbar),
            ("c", c),
            ("eps0", eps0),
            ("mu0", mu0),
            ("e_charge", e_charge),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "constant {name} must be finite and positive, got {v}"
                )));
            }
        }
        let rel = (mu0 * eps0 * c * c - 1.0).abs();
        if rel > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "mu0*eps0*c^2 deviates from 1 by {rel:.3e} (limit 1e-12)"
            )));
        }
        Ok(k)
    }
}

/// Charged point particle with kinetic momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleState {
    /// Charge (C).
    pub q: f64,
    /// Mass (kg).
    pub m: f64,
    /// Position (m).
    pub r: Vec3,
    /// Kinetic momentum (kg·m/s).
    pub p: Vec3,
}

impl ParticleState {
    pub fn new(q: f64, m: f64, r: Vec3, p: Vec3) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidArgument(format!("particle mass must be positive, got {m}")));
        }
        if !q.is_finite() || !r.is_finite() || !p.is_finite() {
            return Err(Error::InvalidArgument("particle state has non-finite fields".into()));
        }
        Ok(Self { q, m, r, p })
    }

    /// Particle pinned to path sample `k`, with p = m · v from the centered
    /// difference of neighboring samples (one-sided at the endpoints).
    pub fn at_path_sample(q: f64, m: f64, path: &SampledPath, k: usize) -> Result<Self> {
        let v = path.velocity_at(k)?;
        Self::new(q, m, path.samples[k].r, m * v)
    }
}

/// Circular current loop; `axis` is unit-normalized at construction and the
/// current circulates right-handed about it (positive current drives flux
/// along +axis).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularLoop {
    pub center: Vec3,
    pub axis: Vec3,
    /// Loop radius (m).
    pub radius: f64,
    /// Current (A).
    pub current: f64,
}

/// Finite solenoid described by its winding density; physically equivalent
/// to a stack of circular loops (see [`solenoid_to_loops`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solenoid {
    pub center: Vec3,
    pub axis: Vec3,
    /// Bore radius (m).
    pub radius: f64,
    /// Axial length (m).
    pub length: f64,
    /// Winding density n (1/m).
    pub turns_per_meter: f64,
    /// Current per turn (A).
    pub current: f64,
}

/// Piecewise-linear current filament.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentChain {
    pub points: Vec<Vec3>,
    /// Current (A), flowing from the first point toward the last.
    pub current: f64,
}

/// Current-carrying source shapes.
#[derive(Debug, Clone, PartialEq)]
pub enum CurrentSource {
    CircularLoop(CircularLoop),
    Solenoid(Solenoid),
    SegmentChain(SegmentChain),
}

fn unit_axis(axis: Vec3) -> Result<Vec3> {
    if !axis.is_finite() {
        return Err(Error::InvalidArgument("axis has non-finite components".into()));
    }
    axis.normalized()
        .ok_or_else(|| Error::InvalidArgument("axis vector must be nonzero".into()))
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite and positive, got {v}")))
    }
}

impl CircularLoop {
    pub fn new(center: Vec3, axis: Vec3, radius: f64, current: f64) -> Result<Self> {
        if !center.is_finite() || !current.is_finite() {
            return Err(Error::InvalidArgument("loop has non-finite fields".into()));
        }
        Ok(Self { center, axis: unit_axis(axis)?, radius: positive("radius", radius)?, current })
    }

    /// Right-handed in-plane frame of the loop.
    pub fn frame(&self) -> (Vec3, Vec3) {
        plane_basis(self.axis)
    }
}

impl Solenoid {
    pub fn new(
        center: Vec3,
        axis: Vec3,
        radius: f64,
        length: f64,
        turns_per_meter: f64,
        current: f64,
    ) -> Result<Self> {
        if !center.is_finite() || !current.is_finite() {
            return Err(Error::InvalidArgument("solenoid has non-finite fields".into()));
        }
        Ok(Self {
            center,
            axis: unit_axis(axis)?,
            radius: positive("radius", radius)?,
            length: positive("length", length)?,
            turns_per_meter: positive("turns_per_meter", turns_per_meter)?,
            current,
        })
    }

    /// Total ampere-turns N·I (A).
    pub fn ampere_turns(&self) -> f64 {
        self.turns_per_meter * self.length * self.current
    }

    /// Ideal infinite-solenoid bore flux μ₀·n·I·πa² (Wb); the standard
    /// closed-form reference for long aspect ratios.
    pub fn ideal_bore_flux(&self, mu0: f64) -> f64 {
        mu0 * self.turns_per_meter * self.current * std::f64::consts::PI * self.radius * self.radius
    }
}

impl SegmentChain {
    pub fn new(points: Vec<Vec3>, current: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument("segment chain needs at least two points".into()));
        }
        if !current.is_finite() {
            return Err(Error::InvalidArgument("segment chain current not finite".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidArgument(format!("chain point {i} not finite")));
            }
        }
        for (i, w) in points.windows(2).enumerate() {
            if (w[1] - w[0]).norm() == 0.0 {
                return Err(Error::InvalidArgument(format!("chain segment {i} has zero length")));
            }
        }
        Ok(Self { points, current })
    }
}

/// Discretize a solenoid into `n_loops` evenly spaced loops spanning its
/// length, each carrying ampere-turns / n_loops; the total N·I is conserved.
pub fn solenoid_to_loops(s: &Solenoid, n_loops: usize) -> Result<Vec<CircularLoop>> {
    if n_loops == 0 {
        return Err(Error::InvalidArgument("n_loops must be at least 1".into()));
    }
    let per_loop = s.ampere_turns() / n_loops as f64;
    let dz = s.length / n_loops as f64;
    let start = -0.5 * s.length + 0.5 * dz;
    (0..n_loops)
        .map(|k| {
            let z = start + k as f64 * dz;
            CircularLoop::new(s.center + z * s.axis, s.axis, s.radius, per_loop)
        })
        .collect()
}

/// Charged-shell geometries carrying a time-dependent total charge.
#[derive(Debug, Clone, PartialEq)]
pub enum ChargeGeometry {
    SphericalShell { center: Vec3, radius: f64 },
    CylindricalShell { center: Vec3, axis: Vec3, radius: f64, length: f64 },
}

impl ChargeGeometry {
    pub fn spherical(center: Vec3, radius: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::InvalidArgument("shell center not finite".into()));
        }
        Ok(Self::SphericalShell { center, radius: positive("radius", radius)? })
    }

    pub fn cylindrical(center: Vec3, axis: Vec3, radius: f64, length: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::InvalidArgument("shell center not finite".into()));
        }
        Ok(Self::CylindricalShell {
            center,
            axis: unit_axis(axis)?,
            radius: positive("radius", radius)?,
            length: positive("length", length)?,
        })
    }

    pub fn center(&self) -> Vec3 {
        match self {
            Self::SphericalShell { center, .. } => *center,
            Self::CylindricalShell { center, .. } => *center,
        }
    }
}

/// Sampled waveform table with linear interpolation; zero outside the table
/// range. Used for the time-dependent charge of the electric sources.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    t: Vec<f64>,
    v: Vec<f64>,
}

impl Waveform {
    pub fn new(t: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if t.len() != v.len() {
            return Err(Error::InvalidArgument(format!(
                "waveform table length mismatch: {} times vs {} values",
                t.len(),
                v.len()
            )));
        }
        if t.len() < 2 {
            return Err(Error::InvalidArgument("waveform table needs at least two samples".into()));
        }
        for w in t.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidArgument(format!(
                    "waveform timestamps must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        if t.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("waveform table has non-finite entries".into()));
        }
        Ok(Self { t, v })
    }

    /// Constant zero waveform over a nominal window.
    pub fn zero() -> Self {
        Self { t: vec![0.0, 1.0], v: vec![0.0, 0.0] }
    }

    pub fn value_at(&self, time: f64) -> f64 {
        let t = &self.t;
        if time <= t[0] || time >= t[t.len() - 1] {
            // Outside the table the waveform is defined as zero. The table
            // endpoints themselves are usually zero as well; no continuity
            // requirement is imposed here.
            if time == t[0] {
                return self.v[0];
            }
            if time == t[t.len() - 1] {
                return self.v[t.len() - 1];
            }
            return 0.0;
        }
        let idx = match t.binary_search_by(|probe| probe.partial_cmp(&time).unwrap()) {
            Ok(i) => return self.v[i],
            Err(i) => i,
        };
        let (t0, t1) = (t[idx - 1], t[idx]);
        let (v0, v1) = (self.v[idx - 1], self.v[idx]);
        v0 + (v1 - v0) * (time - t0) / (t1 - t0)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.t
    }

    /// Time span of the nonzero part of the table, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        let first = self.v.iter().position(|&v| v != 0.0)?;
        let last = self.v.iter().rposition(|&v| v != 0.0)?;
        // The interpolant becomes nonzero one breakpoint before/after.
        let lo = if first == 0 { self.t[0] } else { self.t[first - 1] };
        let hi = if last == self.v.len() - 1 { self.t[last] } else { self.t[last + 1] };
        Some((lo, hi))
    }

    /// ∫ v dt over the table (trapezoid; exact for the interpolant).
    pub fn area(&self) -> f64 {
        self.t
            .windows(2)
            .zip(self.v.windows(2))
            .map(|(tw, vw)| 0.5 * (vw[0] + vw[1]) * (tw[1] - tw[0]))
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { t: self.t.clone(), v: self.v.iter().map(|v| v * factor).collect() }
    }
}

/// Charge source: a shell geometry plus the total-charge waveform Q(t).
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeSource {
    pub geometry: ChargeGeometry,
    pub charge_waveform: Waveform,
}

impl ChargeSource {
    pub fn new(geometry: ChargeGeometry, charge_waveform: Waveform) -> Self {
        Self { geometry, charge_waveform }
    }

    pub fn charge_at(&self, t: f64) -> f64 {
        self.charge_waveform.value_at(t)
    }
}

/// One time-stamped position sample of a particle path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    /// Time (s).
    pub t: f64,
    /// Position (m).
    pub r: Vec3,
}

/// Closure tolerance for closed paths (m).
pub const PATH_CLOSURE_TOL: f64 = 1e-9;

/// Time-stamped polyline path of a particle through the interferometer.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    pub samples: Vec<PathSample>,
    pub closed: bool,
}

impl SampledPath {
    pub fn new(samples: Vec<PathSample>, closed: bool) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidArgument("path needs at least two samples".into()));
        }
        for s in &samples {
            if !s.t.is_finite() || !s.r.is_finite() {
                return Err(Error::InvalidArgument("path sample not finite".into()));
            }
        }
        for w in samples.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(Error::InvalidArgument(format!(
                    "path timestamps must be strictly increasing ({} then {})",
                    w[0].t, w[1].t
                )));
            }
        }
        if closed {
            let gap = samples[0].r.distance(samples[samples.len() - 1].r);
            if gap > PATH_CLOSURE_TOL {
                return Err(Error::Geometry(format!(
                    "closed path endpoints differ by {gap:.3e} m (limit {PATH_CLOSURE_TOL:.0e})"
                )));
            }
        }
        Ok(Self { samples, closed })
    }

    pub fn from_points(points: &[Vec3], t_start: f64, t_end: f64, closed: bool) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument("path needs at least two points".into()));
        }
        if !(t_end > t_start) {
            return Err(Error::InvalidArgument("path needs t_end > t_start".into()));
        }
        let n = points.len();
        let dt = (t_end - t_start) / (n - 1) as f64;
        let samples = points
            .iter()
            .enumerate()
            .map(|(i, &r)| PathSample { t: t_start + i as f64 * dt, r })
            .collect();
        Self::new(samples, closed)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn segment_count(&self) -> usize {
        self.samples.len() - 1
    }

    /// Total polyline arclength (m).
    pub fn arclength(&self) -> f64 {
        self.samples.windows(2).map(|w| (w[1].r - w[0].r).norm()).sum()
    }

    /// Velocity dl/dt at sample `k`: centered difference in the interior,
    /// one-sided at the endpoints.
    pub fn velocity_at(&self, k: usize) -> Result<Vec3> {
        let n = self.samples.len();
        if k >= n {
            return Err(Error::InvalidArgument(format!("sample index {k} out of range {n}")));
        }
        let s = &self.samples;
        let (i, j) = if k == 0 {
            (0, 1)
        } else if k == n - 1 {
            (n - 2, n - 1)
        } else {
            (k - 1, k + 1)
        };
        Ok((s[j].r - s[i].r) / (s[j].t - s[i].t))
    }

    /// Piecewise-linear refinement: every segment longer than
    /// `max_segment_length` is split into equal pieces, with timestamps
    /// interpolated linearly. Endpoints, interior vertices, and the closure
    /// flag are preserved; an already-fine path is returned unchanged.
    pub fn resample(&self, max_segment_length: f64) -> Result<SampledPath> {
        if !(max_segment_length > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "max_segment_length must be positive, got {max_segment_length}"
            )));
        }
        let mut samples = Vec::with_capacity(self.samples.len());
        samples.push(self.samples[0]);
        for w in self.samples.windows(2) {
            let (a, b) = (w[0], w[1]);
            let seg_len = (b.r - a.r).norm();
            // Slack keeps segments at exactly the target length from being
            // re-split by floating-point noise (idempotence on fine paths).
            let ratio = seg_len / max_segment_length * (1.0 - 1e-12);
            let pieces = if ratio > 1.0 { ratio.ceil() as usize } else { 1 };
            for j in 1..=pieces {
                if j == pieces {
                    samples.push(b);
                } else {
                    let f = j as f64 / pieces as f64;
                    samples.push(PathSample { t: a.t + f * (b.t - a.t), r: a.r + f * (b.r - a.r) });
                }
            }
        }
        SampledPath::new(samples, self.closed)
    }

    /// Position at time `t` by linear interpolation, clamped to the path's
    /// time window.
    pub fn position_at(&self, t: f64) -> Vec3 {
        let s = &self.samples;
        if t <= s[0].t {
            return s[0].r;
        }
        if t >= s[s.len() - 1].t {
            return s[s.len() - 1].r;
        }
        let idx = s.partition_point(|ps| ps.t < t);
        let (a, b) = (s[idx - 1], s[idx]);
        let f = (t - a.t) / (b.t - a.t);
        a.r + f * (b.r - a.r)
    }

    /// Circular arc of `samples` points at constant radius about `center` in
    /// the plane normal to `normal`, from `angle0` to `angle1` (radians,
    /// measured in the deterministic in-plane basis of [`plane_basis`]).
    pub fn arc(
        center: Vec3,
        normal: Vec3,
        radius: f64,
        angle0: f64,
        angle1: f64,
        samples: usize,
        t_start: f64,
        t_end: f64,
    ) -> Result<Self> {
        if samples < 2 {
            return Err(Error::InvalidArgument("arc needs at least two samples".into()));
        }
        let radius = positive("radius", radius)?;
        let n = normal
            .normalized()
            .ok_or_else(|| Error::InvalidArgument("arc normal must be nonzero".into()))?;
        let (e1, e2) = plane_basis(n);
        let pts: Vec<Vec3> = (0..samples)
            .map(|k| {
                let f = k as f64 / (samples - 1) as f64;
                let a = angle0 + f * (angle1 - angle0);
                center + radius * (a.cos() * e1 + a.sin() * e2)
            })
            .collect();
        Self::from_points(&pts, t_start, t_end, false)
    }

    /// Closed circle traversed counterclockwise about `normal` (right-handed),
    /// with the first point repeated exactly at the end.
    pub fn circle(
        center: Vec3,
        normal: Vec3,
        radius: f64,
        samples: usize,
        t_start: f64,
        t_end: f64,
    ) -> Result<Self> {
        if samples < 3 {
            return Err(Error::InvalidArgument("circle needs at least three samples".into()));
        }
        let radius = positive("radius", radius)?;
        let n = normal
            .normalized()
            .ok_or_else(|| Error::InvalidArgument("circle normal must be nonzero".into()))?;
        let (e1, e2) = plane_basis(n);
        let pts: Vec<Vec3> = (0..=samples)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * (k % samples) as f64 / samples as f64;
                center + radius * (a.cos() * e1 + a.sin() * e2)
            })
            .collect();
        Self::from_points(&pts, t_start, t_end, true)
    }

    /// Same polyline traversed backwards; timestamps are remapped onto the
    /// original time window so they stay strictly increasing.
    pub fn reversed(&self) -> SampledPath {
        let t0 = self.samples[0].t;
        let t1 = self.samples[self.samples.len() - 1].t;
        let samples = self
            .samples
            .iter()
            .rev()
            .map(|s| PathSample { t: t0 + (t1 - s.t), r: s.r })
            .collect();
        SampledPath { samples, closed: self.closed }
    }
}
