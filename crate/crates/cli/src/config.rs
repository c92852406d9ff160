//! Scenario configuration: a strict TOML schema with unknown-key rejection,
//! defaults, and the translation into the simulator's domain types.
//!
//! The grammar is documented in the repository README. Parsing happens in
//! three passes: a TOML syntax pass (errors carry line/column), a schema walk
//! that rejects unknown keys with a nearest-key suggestion, and the serde
//! deserialization into [`ConfigDoc`]. Semantic validation and the build into
//! domain objects live in [`ConfigDoc::build`].

use abvac::fields::{unit_scalar_potential, FieldNumerics};
use abvac::kernels::{PolarizationSet, QuadratureSpec};
use abvac::math::Vec3;
use abvac::model::{
    ChargeGeometry, ChargeSource, PhysicalConstants, SampledPath, Solenoid, Waveform,
};
use abvac::vacuum::{
    ElectricScenario, FieldRoute, IntermediateScenario, MagneticScenario, ScenarioNumerics,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::CliError;

/// Parsed and validated configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigDoc {
    pub scenario: String,
    #[serde(default)]
    pub constants: ConstantsCfg,
    #[serde(default)]
    pub particle: ParticleCfg,
    #[serde(default)]
    pub numerics: NumericsCfg,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sources: BTreeMap<String, SourceCfg>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub paths: BTreeMap<String, PathCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnetic: Option<MagneticCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intermediate: Option<IntermediateCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub electric: Option<ElectricCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_check: Option<KernelCheckCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepCfg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConstantsCfg {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_charge: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ParticleCfg {
    /// Particle charge (C); defaults to the elementary charge.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charge: Option<f64>,
    /// Particle mass (kg); defaults to 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
}

/// Numerics overrides; every field has the library default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NumericsCfg {
    pub exclusion_radius: f64,
    /// 0 selects the automatic loop count max(200, ceil(20·length/radius)).
    pub loops_per_solenoid: usize,
    pub segments_per_loop: usize,
    pub loop_nodes: usize,
    pub flux_radial_cells: usize,
    pub flux_angular_cells: usize,
    pub shell_nodes: usize,
    pub max_segment_fraction: f64,
    pub eta_scale: f64,
    pub eta_rungs: usize,
    pub eta_ratio: f64,
    pub panel_nodes: usize,
    pub residual_limit: f64,
}

impl Default for NumericsCfg {
    fn default() -> Self {
        let f = FieldNumerics::default();
        let q = QuadratureSpec::default();
        let s = ScenarioNumerics::default();
        Self {
            exclusion_radius: f.exclusion_radius,
            loops_per_solenoid: 0,
            segments_per_loop: f.segments_per_loop,
            loop_nodes: f.loop_nodes,
            flux_radial_cells: f.flux_radial_cells,
            flux_angular_cells: f.flux_angular_cells,
            shell_nodes: f.shell_nodes,
            max_segment_fraction: s.max_segment_fraction,
            eta_scale: q.eta_scale,
            eta_rungs: q.rungs,
            eta_ratio: q.ratio,
            panel_nodes: q.panel_nodes,
            residual_limit: q.residual_limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SourceCfg {
    Solenoid {
        center: [f64; 3],
        axis: [f64; 3],
        radius: f64,
        length: f64,
        turns_per_meter: f64,
        current: f64,
    },
    CircularLoop {
        center: [f64; 3],
        axis: [f64; 3],
        radius: f64,
        current: f64,
    },
    SegmentChain {
        points: Vec<[f64; 3]>,
        current: f64,
    },
    SphericalShell {
        center: [f64; 3],
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        charge_waveform: Option<WaveformCfg>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        potential_waveform: Option<WaveformCfg>,
    },
    CylindricalShell {
        center: [f64; 3],
        axis: [f64; 3],
        radius: f64,
        length: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        charge_waveform: Option<WaveformCfg>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        potential_waveform: Option<WaveformCfg>,
    },
}

/// Waveform specification: an explicit table or a pulse generator. Exactly
/// one of `amplitude` and `area` fixes a generator's height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformCfg {
    /// "table" | "rect" | "triangle" | "raised_cosine"
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
    /// Edge time of the rect generator; defaults to duration/10⁴.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rise: Option<f64>,
    /// Table resolution of the raised-cosine generator; defaults to 400.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PathCfg {
    Arc {
        center: [f64; 3],
        normal: [f64; 3],
        radius: f64,
        angle_start: f64,
        angle_end: f64,
        #[serde(default = "default_path_samples")]
        samples: usize,
        #[serde(default)]
        t_start: f64,
        #[serde(default = "default_t_end")]
        t_end: f64,
    },
    Circle {
        center: [f64; 3],
        normal: [f64; 3],
        radius: f64,
        #[serde(default = "default_path_samples")]
        samples: usize,
        #[serde(default)]
        t_start: f64,
        #[serde(default = "default_t_end")]
        t_end: f64,
    },
    Polyline {
        points: Vec<[f64; 3]>,
        #[serde(default)]
        t_start: f64,
        #[serde(default = "default_t_end")]
        t_end: f64,
        #[serde(default)]
        closed: bool,
    },
}

fn default_path_samples() -> usize {
    64
}

fn default_t_end() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagneticCfg {
    pub solenoid: String,
    pub arm_a: String,
    pub arm_b: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntermediateCfg {
    pub solenoid: String,
    pub trap_radius_a: f64,
    pub trap_radius_b: f64,
    pub theta: f64,
    #[serde(default = "default_source_angle")]
    pub source_angle: f64,
    #[serde(default)]
    pub plane_offset: f64,
    #[serde(default = "default_t_end")]
    pub leg_duration: f64,
}

fn default_source_angle() -> f64 {
    std::f64::consts::FRAC_PI_2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectricCfg {
    pub tube_a: String,
    pub tube_b: String,
    /// Hold window (t_enter, t_exit) in seconds.
    pub window: [f64; 2],
    #[serde(default = "default_electric_samples")]
    pub samples: usize,
}

fn default_electric_samples() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelCheckCfg {
    pub samples: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub tol: f64,
}

impl Default for KernelCheckCfg {
    fn default() -> Self {
        Self { samples: 20, r_min: 0.01, r_max: 10.0, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCfg {
    /// "current" (magnetic), "theta" (intermediate), "pulse_scale" (electric).
    pub parameter: String,
    pub values: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Parsing with strict schema
// ---------------------------------------------------------------------------

/// Parse a config document: TOML syntax, strict schema, then typed
/// deserialization. Unknown keys are rejected with a nearest-key suggestion.
pub fn parse_config(text: &str) -> Result<ConfigDoc, CliError> {
    let value: toml::Value = toml::from_str(text).map_err(|e| syntax_error(text, &e))?;
    walk_schema(&value, &mut Vec::new())?;
    let doc: ConfigDoc = toml::from_str(text).map_err(|e| syntax_error(text, &e))?;
    validate_semantics(&doc)?;
    Ok(doc)
}

fn syntax_error(text: &str, err: &toml::de::Error) -> CliError {
    let pos = err.span().map(|s| {
        let upto = &text[..s.start.min(text.len())];
        let line = upto.matches('\n').count() + 1;
        let col = upto.len() - upto.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
        format!(" at line {line}, column {col}")
    });
    CliError::Config(format!("config parse error{}: {}", pos.unwrap_or_default(), err.message()))
}

const ROOT_KEYS: &[&str] = &[
    "scenario", "constants", "particle", "numerics", "sources", "paths", "magnetic",
    "intermediate", "electric", "kernel_check", "sweep",
];
const CONSTANTS_KEYS: &[&str] = &["hbar", "c", "eps0", "mu0", "e_charge"];
const PARTICLE_KEYS: &[&str] = &["charge", "mass"];
const NUMERICS_KEYS: &[&str] = &[
    "exclusion_radius", "loops_per_solenoid", "segments_per_loop", "loop_nodes",
    "flux_radial_cells", "flux_angular_cells", "shell_nodes", "max_segment_fraction",
    "eta_scale", "eta_rungs", "eta_ratio", "panel_nodes", "residual_limit",
];
const MAGNETIC_KEYS: &[&str] = &["solenoid", "arm_a", "arm_b"];
const INTERMEDIATE_KEYS: &[&str] = &[
    "solenoid", "trap_radius_a", "trap_radius_b", "theta", "source_angle", "plane_offset",
    "leg_duration",
];
const ELECTRIC_KEYS: &[&str] = &["tube_a", "tube_b", "window", "samples"];
const KERNEL_CHECK_KEYS: &[&str] = &["samples", "r_min", "r_max", "tol"];
const SWEEP_KEYS: &[&str] = &["parameter", "values"];
const WAVEFORM_KEYS: &[&str] =
    &["kind", "t", "values", "t_start", "duration", "amplitude", "area", "rise", "samples"];

const SOURCE_TYPES: &[(&str, &[&str])] = &[
    ("solenoid", &["type", "center", "axis", "radius", "length", "turns_per_meter", "current"]),
    ("circular_loop", &["type", "center", "axis", "radius", "current"]),
    ("segment_chain", &["type", "points", "current"]),
    ("spherical_shell", &["type", "center", "radius", "charge_waveform", "potential_waveform"]),
    (
        "cylindrical_shell",
        &["type", "center", "axis", "radius", "length", "charge_waveform", "potential_waveform"],
    ),
];
const PATH_TYPES: &[(&str, &[&str])] = &[
    ("arc", &["type", "center", "normal", "radius", "angle_start", "angle_end", "samples", "t_start", "t_end"]),
    ("circle", &["type", "center", "normal", "radius", "samples", "t_start", "t_end"]),
    ("polyline", &["type", "points", "t_start", "t_end", "closed"]),
];

fn walk_schema(value: &toml::Value, path: &mut Vec<String>) -> Result<(), CliError> {
    let Some(table) = value.as_table() else { return Ok(()) };
    let context: Vec<&str> = path.iter().map(|s| s.as_str()).collect();
    match context.as_slice() {
        [] => {
            check_keys(table, ROOT_KEYS, &context)?;
            for key in ["constants", "particle", "numerics", "sources", "paths", "magnetic",
                        "intermediate", "electric", "kernel_check", "sweep"] {
                if let Some(v) = table.get(key) {
                    path.push(key.to_string());
                    walk_schema(v, path)?;
                    path.pop();
                }
            }
        }
        ["constants"] => check_keys(table, CONSTANTS_KEYS, &context)?,
        ["particle"] => check_keys(table, PARTICLE_KEYS, &context)?,
        ["numerics"] => check_keys(table, NUMERICS_KEYS, &context)?,
        ["magnetic"] => check_keys(table, MAGNETIC_KEYS, &context)?,
        ["intermediate"] => check_keys(table, INTERMEDIATE_KEYS, &context)?,
        ["electric"] => check_keys(table, ELECTRIC_KEYS, &context)?,
        ["kernel_check"] => check_keys(table, KERNEL_CHECK_KEYS, &context)?,
        ["sweep"] => check_keys(table, SWEEP_KEYS, &context)?,
        ["sources"] | ["paths"] => {
            for (name, entry) in table {
                path.push(name.clone());
                walk_schema(entry, path)?;
                path.pop();
            }
        }
        ["sources", _name] => {
            check_typed_table(table, SOURCE_TYPES, &context)?;
            for wf in ["charge_waveform", "potential_waveform"] {
                if let Some(v) = table.get(wf) {
                    path.push(wf.to_string());
                    walk_schema(v, path)?;
                    path.pop();
                }
            }
        }
        ["sources", _name, _wf] => check_keys(table, WAVEFORM_KEYS, &context)?,
        ["paths", _name] => check_typed_table(table, PATH_TYPES, &context)?,
        other => {
            return Err(CliError::Config(format!(
                "internal schema walk reached unexpected context {other:?}"
            )))
        }
    }
    Ok(())
}

fn check_typed_table(
    table: &toml::map::Map<String, toml::Value>,
    types: &[(&str, &[&str])],
    context: &[&str],
) -> Result<(), CliError> {
    let where_ = context.join(".");
    let Some(ty) = table.get("type").and_then(|v| v.as_str()) else {
        return Err(CliError::Config(format!(
            "{where_}: missing required key `type` (one of {})",
            types.iter().map(|(t, _)| format!("`{t}`")).collect::<Vec<_>>().join(", ")
        )));
    };
    let Some((_, keys)) = types.iter().find(|(t, _)| *t == ty) else {
        let names: Vec<&str> = types.iter().map(|(t, _)| *t).collect();
        let hint = nearest(ty, &names).map(|n| format!(" (did you mean `{n}`?)")).unwrap_or_default();
        return Err(CliError::Config(format!("{where_}: unknown type `{ty}`{hint}")));
    };
    check_keys(table, keys, context)
}

fn check_keys(
    table: &toml::map::Map<String, toml::Value>,
    allowed: &[&str],
    context: &[&str],
) -> Result<(), CliError> {
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            let where_ = if context.is_empty() {
                "top level".to_string()
            } else {
                format!("`{}`", context.join("."))
            };
            let hint = nearest(key, allowed)
                .map(|n| format!(" (did you mean `{n}`?)"))
                .unwrap_or_default();
            return Err(CliError::Config(format!("unknown key `{key}` in {where_}{hint}")));
        }
    }
    Ok(())
}

/// Closest candidate by edit distance, if reasonably close.
fn nearest<'a>(word: &str, candidates: &[&'a str]) -> Option<&'a str> {
    candidates
        .iter()
        .map(|c| (levenshtein(word, c), *c))
        .min()
        .filter(|(d, c)| *d <= (c.len().max(word.len()) / 2).max(1))
        .map(|(_, c)| c)
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut prev = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let cost = if ca == cb { prev } else { prev + 1 };
            prev = row[j + 1];
            row[j + 1] = cost.min(row[j] + 1).min(prev + 1);
        }
    }
    row[b.len()]
}

/// Re-run the semantic validation, e.g. after a `--scenario` override.
pub fn revalidate(doc: &ConfigDoc) -> Result<(), CliError> {
    validate_semantics(doc)
}

fn validate_semantics(doc: &ConfigDoc) -> Result<(), CliError> {
    let known = ["magnetic", "intermediate", "electric", "kernel-check"];
    if !known.contains(&doc.scenario.as_str()) {
        let hint = nearest(&doc.scenario, &known)
            .map(|n| format!(" (did you mean `{n}`?)"))
            .unwrap_or_default();
        return Err(CliError::Config(format!("unknown scenario `{}`{hint}", doc.scenario)));
    }
    let n = &doc.numerics;
    for (field, v) in [
        ("numerics.exclusion_radius", n.exclusion_radius),
        ("numerics.max_segment_fraction", n.max_segment_fraction),
        ("numerics.eta_scale", n.eta_scale),
        ("numerics.residual_limit", n.residual_limit),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::Config(format!("{field} must be positive, got {v}")));
        }
    }
    if n.eta_ratio <= 1.0 {
        return Err(CliError::Config(format!(
            "numerics.eta_ratio must exceed 1, got {}",
            n.eta_ratio
        )));
    }
    for (field, v) in [
        ("numerics.segments_per_loop", n.segments_per_loop),
        ("numerics.loop_nodes", n.loop_nodes),
        ("numerics.flux_radial_cells", n.flux_radial_cells),
        ("numerics.flux_angular_cells", n.flux_angular_cells),
        ("numerics.shell_nodes", n.shell_nodes),
        ("numerics.eta_rungs", n.eta_rungs),
        ("numerics.panel_nodes", n.panel_nodes),
    ] {
        if v < 1 {
            return Err(CliError::Config(format!("{field} must be at least 1, got {v}")));
        }
    }
    if let Some(kc) = &doc.kernel_check {
        if kc.samples < 1 {
            return Err(CliError::Config("kernel_check.samples must be at least 1".into()));
        }
        if !(kc.r_min > 0.0 && kc.r_max >= kc.r_min) {
            return Err(CliError::Config(format!(
                "kernel_check needs 0 < r_min <= r_max, got [{}, {}]",
                kc.r_min, kc.r_max
            )));
        }
        if kc.tol < 0.0 {
            return Err(CliError::Config("kernel_check.tol must be nonnegative".into()));
        }
    }
    if let Some(sweep) = &doc.sweep {
        if sweep.values.is_empty() {
            return Err(CliError::Config("sweep.values must not be empty".into()));
        }
        let valid = match doc.scenario.as_str() {
            "magnetic" => "current",
            "intermediate" => "theta",
            "electric" => "pulse_scale",
            _ => {
                return Err(CliError::Config(
                    "sweep is not supported for the kernel-check scenario".into(),
                ))
            }
        };
        if sweep.parameter != valid {
            return Err(CliError::Config(format!(
                "sweep parameter `{}` is not valid for the {} scenario (expected `{valid}`)",
                sweep.parameter, doc.scenario
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Build into domain objects
// ---------------------------------------------------------------------------

/// Everything the runner needs for one scenario execution.
#[derive(Debug, Clone)]
pub struct Built {
    pub scenario: BuiltScenario,
    pub consts: PhysicalConstants,
    pub numerics: ScenarioNumerics,
    pub quadrature: QuadratureSpec,
    pub sweep: Option<SweepCfg>,
}

#[derive(Debug, Clone)]
pub enum BuiltScenario {
    Magnetic(MagneticScenario),
    Intermediate(IntermediateScenario),
    Electric(ElectricScenario),
    KernelCheck(KernelCheckCfg),
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

impl ConfigDoc {
    /// Effective physical constants: SI defaults, overrides applied, μ₀
    /// derived from the effective ε₀c² unless set explicitly.
    pub fn constants(&self) -> Result<PhysicalConstants, CliError> {
        let si = PhysicalConstants::si();
        let c = self.constants.c.unwrap_or(si.c);
        let eps0 = self.constants.eps0.unwrap_or(si.eps0);
        let mu0 = self.constants.mu0.unwrap_or(1.0 / (eps0 * c * c));
        PhysicalConstants::new(
            self.constants.hbar.unwrap_or(si.hbar),
            c,
            eps0,
            mu0,
            self.constants.e_charge.unwrap_or(si.e_charge),
        )
        .map_err(CliError::Core)
    }

    pub fn scenario_numerics(&self) -> ScenarioNumerics {
        let n = &self.numerics;
        ScenarioNumerics {
            fields: FieldNumerics {
                exclusion_radius: n.exclusion_radius,
                loops_per_solenoid: (n.loops_per_solenoid > 0).then_some(n.loops_per_solenoid),
                segments_per_loop: n.segments_per_loop,
                loop_nodes: n.loop_nodes,
                flux_radial_cells: n.flux_radial_cells,
                flux_angular_cells: n.flux_angular_cells,
                shell_nodes: n.shell_nodes,
            },
            quadrature: self.quadrature_spec(),
            max_segment_fraction: n.max_segment_fraction,
        }
    }

    pub fn quadrature_spec(&self) -> QuadratureSpec {
        let n = &self.numerics;
        QuadratureSpec {
            eta_scale: n.eta_scale,
            rungs: n.eta_rungs,
            ratio: n.eta_ratio,
            panel_nodes: n.panel_nodes,
            tail_eps: QuadratureSpec::default().tail_eps,
            residual_limit: n.residual_limit,
        }
    }

    fn lookup_solenoid(&self, name: &str, section: &str) -> Result<Solenoid, CliError> {
        let src = self.sources.get(name).ok_or_else(|| {
            CliError::Config(format!("{section} references unknown source `{name}`"))
        })?;
        match src {
            SourceCfg::Solenoid { center, axis, radius, length, turns_per_meter, current } => {
                Solenoid::new(
                    vec3(*center),
                    vec3(*axis),
                    *radius,
                    *length,
                    *turns_per_meter,
                    *current,
                )
                .map_err(CliError::Core)
            }
            _ => Err(CliError::Config(format!(
                "{section} source `{name}` must have type `solenoid`"
            ))),
        }
    }

    fn lookup_path(&self, name: &str, section: &str) -> Result<SampledPath, CliError> {
        let path = self.paths.get(name).ok_or_else(|| {
            CliError::Config(format!("{section} references unknown path `{name}`"))
        })?;
        build_path(path).map_err(CliError::Core)
    }

    /// Build a charge source; when a potential waveform is given it is
    /// converted to the charge waveform through the shell's own unit-charge
    /// center potential. Returns the source and the applied-potential pulse
    /// area ∫U dt when known.
    fn build_charge_source(
        &self,
        name: &str,
        consts: &PhysicalConstants,
        fields: &FieldNumerics,
    ) -> Result<(ChargeSource, Option<f64>), CliError> {
        let src = self.sources.get(name).ok_or_else(|| {
            CliError::Config(format!("electric scenario references unknown source `{name}`"))
        })?;
        let (geometry, charge_wf, potential_wf) = match src {
            SourceCfg::SphericalShell { center, radius, charge_waveform, potential_waveform } => (
                ChargeGeometry::spherical(vec3(*center), *radius).map_err(CliError::Core)?,
                charge_waveform,
                potential_waveform,
            ),
            SourceCfg::CylindricalShell {
                center,
                axis,
                radius,
                length,
                charge_waveform,
                potential_waveform,
            } => (
                ChargeGeometry::cylindrical(vec3(*center), vec3(*axis), *radius, *length)
                    .map_err(CliError::Core)?,
                charge_waveform,
                potential_waveform,
            ),
            _ => {
                return Err(CliError::Config(format!(
                    "electric source `{name}` must be a spherical_shell or cylindrical_shell"
                )))
            }
        };
        match (charge_wf, potential_wf) {
            (Some(wf), None) => {
                let waveform = build_waveform(wf, name)?;
                Ok((ChargeSource::new(geometry, waveform), None))
            }
            (None, Some(wf)) => {
                let u_wave = build_waveform(wf, name)?;
                let area = u_wave.area();
                let g_self =
                    unit_scalar_potential(&geometry, geometry.center(), consts.eps0, fields);
                let q_wave = u_wave.scaled(1.0 / g_self);
                Ok((ChargeSource::new(geometry, q_wave), Some(area)))
            }
            (None, None) => Ok((ChargeSource::new(geometry, Waveform::zero()), Some(0.0))),
            (Some(_), Some(_)) => Err(CliError::Config(format!(
                "source `{name}`: give either charge_waveform or potential_waveform, not both"
            ))),
        }
    }

    /// Resolve the scenario (after any CLI override) into domain objects.
    pub fn build(&self, pol: Option<PolarizationSet>) -> Result<Built, CliError> {
        let consts = self.constants()?;
        let numerics = self.scenario_numerics();
        let charge = self.particle.charge.unwrap_or(consts.e_charge);
        let scenario = match self.scenario.as_str() {
            "magnetic" => {
                let cfg = self.magnetic.as_ref().ok_or_else(|| {
                    CliError::Config("magnetic scenario requires a [magnetic] section".into())
                })?;
                BuiltScenario::Magnetic(MagneticScenario {
                    solenoid: self.lookup_solenoid(&cfg.solenoid, "[magnetic]")?,
                    arm_a: self.lookup_path(&cfg.arm_a, "[magnetic]")?,
                    arm_b: self.lookup_path(&cfg.arm_b, "[magnetic]")?,
                    charge,
                    route: match pol {
                        None => FieldRoute::RealSpace,
                        Some(p) => FieldRoute::ModeSpace(p),
                    },
                })
            }
            "intermediate" => {
                let cfg = self.intermediate.as_ref().ok_or_else(|| {
                    CliError::Config(
                        "intermediate scenario requires an [intermediate] section".into(),
                    )
                })?;
                if pol.is_some() {
                    return Err(CliError::Config(
                        "--pol applies to the magnetic and kernel-check scenarios only".into(),
                    ));
                }
                BuiltScenario::Intermediate(IntermediateScenario {
                    solenoid: self.lookup_solenoid(&cfg.solenoid, "[intermediate]")?,
                    trap_radius_a: cfg.trap_radius_a,
                    trap_radius_b: cfg.trap_radius_b,
                    theta: cfg.theta,
                    source_angle: cfg.source_angle,
                    plane_offset: cfg.plane_offset,
                    charge,
                    leg_duration: cfg.leg_duration,
                })
            }
            "electric" => {
                let cfg = self.electric.as_ref().ok_or_else(|| {
                    CliError::Config("electric scenario requires an [electric] section".into())
                })?;
                if pol.is_some() {
                    return Err(CliError::Config(
                        "--pol applies to the magnetic and kernel-check scenarios only".into(),
                    ));
                }
                let (tube_a, area_a) =
                    self.build_charge_source(&cfg.tube_a, &consts, &numerics.fields)?;
                let (tube_b, area_b) =
                    self.build_charge_source(&cfg.tube_b, &consts, &numerics.fields)?;
                let applied_area = match (area_a, area_b) {
                    (Some(a), Some(b)) => Some(a - b),
                    _ => None,
                };
                BuiltScenario::Electric(ElectricScenario {
                    tube_a,
                    tube_b,
                    window: (cfg.window[0], cfg.window[1]),
                    hold_offset_a: Vec3::new(0.0, 0.0, 0.0),
                    hold_offset_b: Vec3::new(0.0, 0.0, 0.0),
                    charge,
                    samples: cfg.samples,
                    applied_area,
                })
            }
            "kernel-check" => {
                BuiltScenario::KernelCheck(self.kernel_check.clone().unwrap_or_default())
            }
            other => return Err(CliError::Config(format!("unknown scenario `{other}`"))),
        };
        Ok(Built {
            scenario,
            consts,
            numerics,
            quadrature: self.quadrature_spec(),
            sweep: self.sweep.clone(),
        })
    }

    /// Normalized round-trippable form: defaults made explicit where they
    /// affect semantics.
    pub fn normalized(&self) -> ConfigDoc {
        self.clone()
    }
}

fn build_path(cfg: &PathCfg) -> abvac::Result<SampledPath> {
    match cfg {
        PathCfg::Arc { center, normal, radius, angle_start, angle_end, samples, t_start, t_end } => {
            SampledPath::arc(
                vec3(*center),
                vec3(*normal),
                *radius,
                *angle_start,
                *angle_end,
                *samples,
                *t_start,
                *t_end,
            )
        }
        PathCfg::Circle { center, normal, radius, samples, t_start, t_end } => {
            SampledPath::circle(vec3(*center), vec3(*normal), *radius, *samples, *t_start, *t_end)
        }
        PathCfg::Polyline { points, t_start, t_end, closed } => {
            let pts: Vec<Vec3> = points.iter().map(|p| vec3(*p)).collect();
            SampledPath::from_points(&pts, *t_start, *t_end, *closed)
        }
    }
}

/// Materialize a waveform spec into a sampled table.
pub fn build_waveform(cfg: &WaveformCfg, source_name: &str) -> Result<Waveform, CliError> {
    let fail = |msg: String| Err(CliError::Config(format!("source `{source_name}`: {msg}")));
    match cfg.kind.as_str() {
        "table" => {
            let (Some(t), Some(v)) = (&cfg.t, &cfg.values) else {
                return fail("table waveform needs `t` and `values`".into());
            };
            Waveform::new(t.clone(), v.clone()).map_err(CliError::Core)
        }
        kind @ ("rect" | "triangle" | "raised_cosine") => {
            let Some(t0) = cfg.t_start else {
                return fail(format!("{kind} waveform needs `t_start`"));
            };
            let Some(tau) = cfg.duration.filter(|d| *d > 0.0) else {
                return fail(format!("{kind} waveform needs a positive `duration`"));
            };
            let raw = match kind {
                "rect" => {
                    let rise = cfg.rise.unwrap_or(tau * 1e-4);
                    if !(rise > 0.0 && 2.0 * rise < tau) {
                        return fail("rect waveform needs 0 < rise < duration/2".into());
                    }
                    Waveform::new(
                        vec![t0, t0 + rise, t0 + tau - rise, t0 + tau],
                        vec![0.0, 1.0, 1.0, 0.0],
                    )
                }
                "triangle" => {
                    Waveform::new(vec![t0, t0 + 0.5 * tau, t0 + tau], vec![0.0, 1.0, 0.0])
                }
                _ => {
                    let n = cfg.samples.unwrap_or(400).max(8);
                    let (mut ts, mut vs) = (Vec::new(), Vec::new());
                    for k in 0..=n {
                        let f = k as f64 / n as f64;
                        ts.push(t0 + f * tau);
                        vs.push(0.5 * (1.0 - (2.0 * std::f64::consts::PI * f).cos()));
                    }
                    Waveform::new(ts, vs)
                }
            }
            .map_err(CliError::Core)?;
            match (cfg.amplitude, cfg.area) {
                (Some(amp), None) => Ok(raw.scaled(amp)),
                (None, Some(area)) => Ok(raw.scaled(area / raw.area())),
                (None, None) => fail(format!("{kind} waveform needs `amplitude` or `area`")),
                (Some(_), Some(_)) => {
                    fail(format!("{kind} waveform takes `amplitude` or `area`, not both"))
                }
            }
        }
        other => {
            let kinds = ["table", "rect", "triangle", "raised_cosine"];
            let hint = nearest(other, &kinds)
                .map(|n| format!(" (did you mean `{n}`?)"))
                .unwrap_or_default();
            fail(format!("unknown waveform kind `{other}`{hint}"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL_MAGNETIC: &str = r#"
scenario = "magnetic"

[sources.coil]
type = "solenoid"
center = [0.0, 0.0, 0.0]
axis = [0.0, 0.0, 1.0]
radius = 0.01
length = 1.0
turns_per_meter = 1000.0
current = 1.0

[paths.left]
type = "arc"
center = [0.0, 0.0, 0.0]
normal = [0.0, 0.0, 1.0]
radius = 0.03
angle_start = 0.0
angle_end = -3.141592653589793

[paths.right]
type = "arc"
center = [0.0, 0.0, 0.0]
normal = [0.0, 0.0, 1.0]
radius = 0.03
angle_start = 0.0
angle_end = 3.141592653589793

[magnetic]
solenoid = "coil"
arm_a = "left"
arm_b = "right"
"#;

    #[test]
    fn minimal_magnetic_parses_with_defaults() {
        let doc = parse_config(MINIMAL_MAGNETIC).unwrap();
        assert_eq!(doc.scenario, "magnetic");
        assert_eq!(doc.numerics, NumericsCfg::default());
        let built = doc.build(None).unwrap();
        match built.scenario {
            BuiltScenario::Magnetic(m) => {
                assert_eq!(m.solenoid.turns_per_meter, 1000.0);
                assert_eq!(m.arm_a.len(), 64);
            }
            other => panic!("wrong scenario {other:?}"),
        }
    }

    #[test]
    fn unknown_key_suggests_nearest() {
        let bad = MINIMAL_MAGNETIC.replace("[sources.coil]", "[sources.coil]\nlenght = 2.0");
        let err = parse_config(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown key `lenght`"), "{msg}");
        assert!(msg.contains("did you mean `length`?"), "{msg}");

        let bad = MINIMAL_MAGNETIC.replace("solenoid = \"coil\"", "solenid = \"coil\"");
        let err = parse_config(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown key `solenid`") && msg.contains("`solenoid`"), "{msg}");
    }

    #[test]
    fn negative_turns_per_meter_names_the_field() {
        let bad = MINIMAL_MAGNETIC.replace("turns_per_meter = 1000.0", "turns_per_meter = -5.0");
        let doc = parse_config(&bad).unwrap();
        let err = doc.build(None).unwrap_err();
        assert!(err.to_string().contains("turns_per_meter"), "{err}");
    }

    #[test]
    fn syntax_error_reports_line_and_column() {
        let err = parse_config("scenario = \"magnetic\"\nbad toml here").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn round_trip_normalized_config() {
        let doc = parse_config(MINIMAL_MAGNETIC).unwrap();
        let emitted = toml::to_string(&doc.normalized()).unwrap();
        let reparsed = parse_config(&emitted).unwrap();
        assert_eq!(reparsed, doc.normalized());
    }

    #[test]
    fn sweep_parameter_must_match_scenario() {
        let with_sweep = format!(
            "{MINIMAL_MAGNETIC}\n[sweep]\nparameter = \"theta\"\nvalues = [1.0]\n"
        );
        let err = parse_config(&with_sweep).unwrap_err();
        assert!(err.to_string().contains("sweep parameter"), "{err}");

        let ok = format!(
            "{MINIMAL_MAGNETIC}\n[sweep]\nparameter = \"current\"\nvalues = [0.5, 1.0]\n"
        );
        assert!(parse_config(&ok).is_ok());
    }

    #[test]
    fn unknown_scenario_and_waveform_kind_suggestions() {
        let bad = MINIMAL_MAGNETIC.replace("scenario = \"magnetic\"", "scenario = \"magnetc\"");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.to_string().contains("did you mean `magnetic`?"), "{err}");

        let wf = WaveformCfg {
            kind: "rectangle".into(),
            t: None,
            values: None,
            t_start: Some(0.0),
            duration: Some(1.0),
            amplitude: Some(1.0),
            area: None,
            rise: None,
            samples: None,
        };
        let err = build_waveform(&wf, "tube").unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("unknown waveform kind `rectangle`") && msg.contains("did you mean"),
            "{msg}"
        );
    }
}
