//! Run configuration: the TOML schema, command-line overrides, validation,
//! and the canonical content key used for reference caching and determinism
//! checks.
//!
//! A config file names a registered problem and optionally overrides scheme,
//! order, mesh mode, resolution, time controls, physics constants, monitor
//! parameters, and output times. Command-line flags override the file. All
//! parse and validation failures are configuration errors (exit code 4).

use serde::Deserialize;

use crate::error::SolverError;
use crate::mesh::{MonitorComponent, MonitorParams, MonitorVariable};
use crate::metrics::{SchemeOrder, HALO};
use crate::problems::ProblemOptions;
use crate::time::TimeControls;
use crate::Scheme;

/// A fully resolved run request: problem name plus every knob the driver
/// honours. Optional fields fall back to the problem's registry defaults.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub problem: String,
    pub options: ProblemOptions,
    pub scheme: Scheme,
    pub order: SchemeOrder,
    pub moving_mesh: bool,
    /// Nodes per direction; the second entry only applies to 2D problems
    /// (a missing second entry means a square grid).
    pub resolution: Option<(usize, Option<usize>)>,
    pub controls: TimeControls,
    pub end_time: Option<f64>,
    pub output_times: Option<Vec<f64>>,
    pub gravity: Option<f64>,
    pub gamma: Option<f64>,
    pub monitor: Option<MonitorOverrides>,
    /// Content key of the run that produced the reference solution, for
    /// error reports on problems without an exact solution.
    pub reference: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: String::new(),
            options: ProblemOptions::default(),
            scheme: Scheme::EnergyStable,
            order: SchemeOrder::Sixth,
            moving_mesh: false,
            resolution: None,
            controls: TimeControls::default(),
            end_time: None,
            output_times: None,
            gravity: None,
            gamma: None,
            monitor: None,
            reference: None,
        }
    }
}

/// Partial monitor settings layered over the problem's defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct MonitorOverrides {
    pub variable: Option<String>,
    pub theta: Option<f64>,
    pub laplacian_variable: Option<String>,
    pub laplacian_theta: Option<f64>,
    pub smoothing_passes: Option<usize>,
    pub jacobi_iterations: Option<usize>,
}

impl MonitorOverrides {
    /// Applies the given fields on top of `base`.
    pub fn apply(&self, base: &mut MonitorParams) -> Result<(), SolverError> {
        if let Some(name) = &self.variable {
            let variable = parse_monitor_variable(name)?;
            for component in &mut base.components {
                component.variable = variable;
            }
        }
        if let Some(theta) = self.theta {
            if !(theta >= 0.0) {
                return Err(SolverError::Config(format!(
                    "monitor theta must be nonnegative, got {theta}"
                )));
            }
            for component in &mut base.components {
                component.theta = theta;
            }
        }
        if self.laplacian_variable.is_some() || self.laplacian_theta.is_some() {
            let mut term = base.laplacian.unwrap_or(MonitorComponent {
                variable: MonitorVariable::Surface,
                theta: 0.0,
            });
            if let Some(name) = &self.laplacian_variable {
                term.variable = parse_monitor_variable(name)?;
            }
            if let Some(theta) = self.laplacian_theta {
                term.theta = theta;
            }
            base.laplacian = Some(term);
        }
        if let Some(passes) = self.smoothing_passes {
            base.smoothing_passes = passes;
        }
        if let Some(sweeps) = self.jacobi_iterations {
            base.jacobi_iterations = sweeps;
        }
        Ok(())
    }
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct OptionsSection {
    blocky_bottom: Option<bool>,
    epsilon: Option<f64>,
    wide_domain: Option<bool>,
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct SchemeSection {
    flux: Option<String>,
    order: Option<u32>,
    mesh: Option<String>,
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct RunSection {
    resolution: Option<Vec<usize>>,
    cfl: Option<f64>,
    dt_max: Option<f64>,
    accuracy_mode: Option<bool>,
    end_time: Option<f64>,
    output_times: Option<Vec<f64>>,
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct PhysicsSection {
    gravity: Option<f64>,
    gamma: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct ReferenceSection {
    run_id: Option<String>,
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct ConfigFile {
    problem: String,
    #[serde(default)]
    options: OptionsSection,
    #[serde(default)]
    scheme: SchemeSection,
    #[serde(default)]
    run: RunSection,
    #[serde(default)]
    physics: PhysicsSection,
    monitor: Option<MonitorOverrides>,
    #[serde(default)]
    reference: ReferenceSection,
}

pub fn parse_scheme(name: &str) -> Result<Scheme, SolverError> {
    match name {
        "ec" => Ok(Scheme::EnergyConservative),
        "es" => Ok(Scheme::EnergyStable),
        _ => Err(SolverError::Config(format!("scheme must be `ec` or `es`, got `{name}`"))),
    }
}

pub fn scheme_name(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::EnergyConservative => "ec",
        Scheme::EnergyStable => "es",
        Scheme::EnergyStableNoTransport => "es-no-transport",
    }
}

/// Parses a mesh mode into the `moving_mesh` flag.
pub fn parse_mesh_mode(name: &str) -> Result<bool, SolverError> {
    match name {
        "static" => Ok(false),
        "moving" => Ok(true),
        _ => Err(SolverError::Config(format!("mesh must be `static` or `moving`, got `{name}`"))),
    }
}

/// Maps the user-facing order `p` in {1, 2, 3} (design accuracy 2p) onto the
/// scheme order.
pub fn parse_order(p: u32) -> Result<SchemeOrder, SolverError> {
    match p {
        1 => Ok(SchemeOrder::Second),
        2 => Ok(SchemeOrder::Fourth),
        3 => Ok(SchemeOrder::Sixth),
        _ => Err(SolverError::Config(format!("order must be 1, 2 or 3, got {p}"))),
    }
}

fn parse_monitor_variable(name: &str) -> Result<MonitorVariable, SolverError> {
    match name {
        "depth" => Ok(MonitorVariable::Depth),
        "surface" => Ok(MonitorVariable::Surface),
        _ => Err(SolverError::Config(format!(
            "monitor variable must be `depth` or `surface`, got `{name}`"
        ))),
    }
}

/// Parses `"N"` or `"N1xN2"` from the command line.
pub fn parse_resolution(text: &str) -> Result<(usize, Option<usize>), SolverError> {
    let bad = || SolverError::Config(format!("resolution must be `N` or `N1xN2`, got `{text}`"));
    match text.split_once('x') {
        None => Ok((text.trim().parse().map_err(|_| bad())?, None)),
        Some((n1, n2)) => Ok((
            n1.trim().parse().map_err(|_| bad())?,
            Some(n2.trim().parse().map_err(|_| bad())?),
        )),
    }
}

fn resolution_from_list(list: &[usize]) -> Result<(usize, Option<usize>), SolverError> {
    match list {
        [n] => Ok((*n, None)),
        [n1, n2] => Ok((*n1, Some(*n2))),
        _ => Err(SolverError::Config(format!(
            "resolution must have 1 or 2 entries, got {}",
            list.len()
        ))),
    }
}

/// Parses a TOML config into a validated [`RunConfig`].
pub fn parse_config(text: &str) -> Result<RunConfig, SolverError> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| SolverError::Config(format!("config parse: {e}")))?;
    let defaults = ProblemOptions::default();
    let mut cfg = RunConfig {
        problem: file.problem,
        options: ProblemOptions {
            blocky_bottom: file.options.blocky_bottom.unwrap_or(defaults.blocky_bottom),
            epsilon: file.options.epsilon.unwrap_or(defaults.epsilon),
            wide_domain: file.options.wide_domain.unwrap_or(defaults.wide_domain),
        },
        monitor: file.monitor,
        reference: file.reference.run_id,
        ..RunConfig::default()
    };
    if let Some(flux) = &file.scheme.flux {
        cfg.scheme = parse_scheme(flux)?;
    }
    if let Some(p) = file.scheme.order {
        cfg.order = parse_order(p)?;
    }
    if let Some(mode) = &file.scheme.mesh {
        cfg.moving_mesh = parse_mesh_mode(mode)?;
    }
    if let Some(list) = &file.run.resolution {
        cfg.resolution = Some(resolution_from_list(list)?);
    }
    if let Some(cfl) = file.run.cfl {
        cfg.controls.cfl = cfl;
    }
    if let Some(dt_max) = file.run.dt_max {
        cfg.controls.dt_max = dt_max;
    }
    if let Some(accuracy) = file.run.accuracy_mode {
        cfg.controls.accuracy_mode = accuracy;
    }
    cfg.end_time = file.run.end_time;
    cfg.output_times = file.run.output_times;
    cfg.gravity = file.physics.gravity;
    cfg.gamma = file.physics.gamma;
    validate(&cfg)?;
    Ok(cfg)
}

/// Command-line overrides, applied on top of a parsed config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub scheme: Option<Scheme>,
    pub moving_mesh: Option<bool>,
    pub resolution: Option<(usize, Option<usize>)>,
    pub order: Option<SchemeOrder>,
}

pub fn apply_overrides(cfg: &mut RunConfig, ov: &Overrides) -> Result<(), SolverError> {
    if let Some(scheme) = ov.scheme {
        cfg.scheme = scheme;
    }
    if let Some(moving) = ov.moving_mesh {
        cfg.moving_mesh = moving;
    }
    if let Some(resolution) = ov.resolution {
        cfg.resolution = Some(resolution);
    }
    if let Some(order) = ov.order {
        cfg.order = order;
    }
    validate(cfg)
}

/// Smallest admissible node count per direction: the widest flux combination
/// plus both ghost frames must fit.
pub fn min_resolution(order: SchemeOrder) -> usize {
    2 * order.p() + 1 + 2 * HALO
}

/// Checks every invariant that does not need the problem registry.
pub fn validate(cfg: &RunConfig) -> Result<(), SolverError> {
    if let Some((n1, n2)) = cfg.resolution {
        let floor = min_resolution(cfg.order);
        for n in [Some(n1), n2].into_iter().flatten() {
            if n < floor {
                return Err(SolverError::Config(format!(
                    "resolution {n} is below the minimum {floor} for this order"
                )));
            }
        }
    }
    if !(cfg.controls.cfl > 0.0 && cfg.controls.cfl <= 1.0) {
        return Err(SolverError::Config(format!(
            "cfl must lie in (0, 1], got {}",
            cfg.controls.cfl
        )));
    }
    if !(cfg.controls.dt_max > 0.0) {
        return Err(SolverError::Config(format!(
            "dt-max must be positive, got {}",
            cfg.controls.dt_max
        )));
    }
    if let Some(t) = cfg.end_time {
        if !(t > 0.0) {
            return Err(SolverError::Config(format!("end-time must be positive, got {t}")));
        }
    }
    if let Some(times) = &cfg.output_times {
        if times.is_empty() {
            return Err(SolverError::Config("output-times must not be empty".into()));
        }
        for pair in times.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(SolverError::Config(format!(
                    "output-times must increase strictly, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        if !(times[0] > 0.0) {
            return Err(SolverError::Config(format!(
                "output-times must be positive, got {}",
                times[0]
            )));
        }
    }
    if let Some(g) = cfg.gravity {
        if !(g > 0.0) {
            return Err(SolverError::Config(format!("gravity must be positive, got {g}")));
        }
    }
    if !(cfg.options.epsilon.is_finite()) {
        return Err(SolverError::Config(format!(
            "epsilon must be finite, got {}",
            cfg.options.epsilon
        )));
    }
    Ok(())
}

fn push_f64(out: &mut String, label: &str, value: f64) {
    use std::fmt::Write;
    write!(out, "{label}={value:?};").unwrap();
}

impl RunConfig {
    /// Canonical rendering of every field that affects the numbers a run
    /// produces. Two configs produce bitwise-identical artifacts exactly when
    /// their canonical strings match.
    pub fn canonical_string(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        write!(
            s,
            "problem={};blocky={};wide={};scheme={};order={};mesh={};",
            self.problem,
            self.options.blocky_bottom,
            self.options.wide_domain,
            scheme_name(self.scheme),
            self.order.p(),
            if self.moving_mesh { "moving" } else { "static" },
        )
        .unwrap();
        push_f64(&mut s, "epsilon", self.options.epsilon);
        match self.resolution {
            Some((n1, Some(n2))) => write!(s, "resolution={n1}x{n2};").unwrap(),
            Some((n1, None)) => write!(s, "resolution={n1};").unwrap(),
            None => s.push_str("resolution=default;"),
        }
        push_f64(&mut s, "cfl", self.controls.cfl);
        push_f64(&mut s, "dt-max", self.controls.dt_max);
        write!(s, "accuracy-mode={};", self.controls.accuracy_mode).unwrap();
        match self.end_time {
            Some(t) => push_f64(&mut s, "end-time", t),
            None => s.push_str("end-time=default;"),
        }
        match &self.output_times {
            Some(times) => {
                s.push_str("output-times=");
                for t in times {
                    write!(s, "{t:?},").unwrap();
                }
                s.push(';');
            }
            None => s.push_str("output-times=default;"),
        }
        match self.gravity {
            Some(g) => push_f64(&mut s, "gravity", g),
            None => s.push_str("gravity=default;"),
        }
        match self.gamma {
            Some(g) => push_f64(&mut s, "gamma", g),
            None => s.push_str("gamma=default;"),
        }
        match &self.monitor {
            Some(m) => write!(s, "monitor={m:?};").unwrap(),
            None => s.push_str("monitor=default;"),
        }
        s
    }

    /// FNV-1a 64-bit hash of [`RunConfig::canonical_string`], in hex: the
    /// run id used for reference caching.
    pub fn content_hash(&self) -> String {
        let mut hash: u64 = 0xcbf29ce484222325;
        for byte in self.canonical_string().bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
        format!("{hash:016x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_minimal_config_gets_registry_defaults() {
        let cfg = parse_config("problem = \"lake-at-rest-1d\"\n").unwrap();
        assert_eq!(cfg.problem, "lake-at-rest-1d");
        assert_eq!(cfg.scheme, Scheme::EnergyStable);
        assert_eq!(cfg.order, SchemeOrder::Sixth);
        assert!(!cfg.moving_mesh);
        assert!(cfg.resolution.is_none());
        assert!(!cfg.options.blocky_bottom);
        assert_eq!(cfg.controls.cfl, 0.4);
    }

    #[test]
    fn a_full_config_round_trips_every_section() {
        let text = r#"
            problem = "perturbation-2d"

            [options]
            blocky-bottom = false
            epsilon = 0.001

            [scheme]
            flux = "ec"
            order = 2
            mesh = "moving"

            [run]
            resolution = [300, 150]
            cfl = 0.25
            dt-max = 0.5
            accuracy-mode = true
            end-time = 0.6
            output-times = [0.12, 0.24, 0.36]

            [physics]
            gravity = 9.812
            gamma = 1.0

            [monitor]
            variable = "surface"
            theta = 800.0
            smoothing-passes = 4

            [reference]
            run-id = "0123456789abcdef"
        "#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.scheme, Scheme::EnergyConservative);
        assert_eq!(cfg.order, SchemeOrder::Fourth);
        assert!(cfg.moving_mesh);
        assert_eq!(cfg.resolution, Some((300, Some(150))));
        assert_eq!(cfg.controls.cfl, 0.25);
        assert_eq!(cfg.controls.dt_max, 0.5);
        assert!(cfg.controls.accuracy_mode);
        assert_eq!(cfg.end_time, Some(0.6));
        assert_eq!(cfg.output_times.as_deref(), Some(&[0.12, 0.24, 0.36][..]));
        assert_eq!(cfg.gravity, Some(9.812));
        assert_eq!(cfg.options.epsilon, 0.001);
        assert_eq!(cfg.reference.as_deref(), Some("0123456789abcdef"));
        let m = cfg.monitor.as_ref().unwrap();
        assert_eq!(m.theta, Some(800.0));
        assert_eq!(m.smoothing_passes, Some(4));
    }

    #[test]
    fn unknown_keys_and_bad_values_are_configuration_errors() {
        for text in [
            "problem = \"x\"\nnot-a-key = 1\n",
            "problem = \"x\"\n[scheme]\nflux = \"upwind\"\n",
            "problem = \"x\"\n[scheme]\nmesh = \"wobbly\"\n",
            "problem = \"x\"\n[scheme]\norder = 4\n",
            "problem = \"x\"\n[run]\nresolution = [1, 2, 3]\n",
            "problem = \"x\"\n[run]\ncfl = 0.0\n",
            "problem = \"x\"\n[run]\ncfl = 1.5\n",
            "problem = \"x\"\n[run]\ndt-max = -1.0\n",
            "problem = \"x\"\n[run]\noutput-times = [0.2, 0.1]\n",
            "problem = \"x\"\n[run]\noutput-times = []\n",
            "problem = \"x\"\n[run]\nend-time = -0.5\n",
            "problem = \"x\"\n[physics]\ngravity = 0.0\n",
        ] {
            let err = parse_config(text).expect_err(text);
            assert_eq!(err.exit_code(), 4, "{text}");
        }
    }

    #[test]
    fn resolutions_below_the_stencil_floor_are_rejected() {
        assert_eq!(min_resolution(SchemeOrder::Second), 15);
        assert_eq!(min_resolution(SchemeOrder::Sixth), 19);
        let text = "problem = \"x\"\n[run]\nresolution = [18]\n";
        assert!(parse_config(text).is_err());
        let text = "problem = \"x\"\n[scheme]\norder = 1\n[run]\nresolution = [18]\n";
        assert!(parse_config(text).is_ok());
    }

    #[test]
    fn command_line_values_override_the_file() {
        let mut cfg = parse_config("problem = \"vortex-2d\"\n[scheme]\nflux = \"ec\"\n").unwrap();
        let ov = Overrides {
            scheme: Some(Scheme::EnergyStable),
            moving_mesh: Some(true),
            resolution: Some(parse_resolution("40x20").unwrap()),
            order: Some(parse_order(2).unwrap()),
        };
        apply_overrides(&mut cfg, &ov).unwrap();
        assert_eq!(cfg.scheme, Scheme::EnergyStable);
        assert!(cfg.moving_mesh);
        assert_eq!(cfg.resolution, Some((40, Some(20))));
        assert_eq!(cfg.order, SchemeOrder::Fourth);

        assert!(parse_resolution("25").unwrap() == (25, None));
        assert!(parse_resolution("6x4x2").is_err());
        assert!(parse_resolution("abc").is_err());
    }

    #[test]
    fn the_content_hash_tracks_every_number_bearing_field() {
        let base = parse_config("problem = \"perturbation-1d\"\n").unwrap();
        let mut seen = vec![base.content_hash()];
        let variants = [
            "problem = \"perturbation-1d\"\n[options]\nepsilon = 0.001\n",
            "problem = \"perturbation-1d\"\n[options]\nwide-domain = true\n",
            "problem = \"perturbation-1d\"\n[scheme]\nflux = \"ec\"\n",
            "problem = \"perturbation-1d\"\n[scheme]\norder = 2\n",
            "problem = \"perturbation-1d\"\n[scheme]\nmesh = \"moving\"\n",
            "problem = \"perturbation-1d\"\n[run]\nresolution = [200]\n",
            "problem = \"perturbation-1d\"\n[run]\ncfl = 0.3\n",
            "problem = \"perturbation-1d\"\n[run]\nend-time = 0.4\n",
            "problem = \"perturbation-1d\"\n[run]\noutput-times = [0.1, 0.2]\n",
            "problem = \"perturbation-1d\"\n[physics]\ngravity = 9.81\n",
            "problem = \"perturbation-1d\"\n[monitor]\ntheta = 50.0\n",
        ];
        for text in variants {
            let hash = parse_config(text).unwrap().content_hash();
            assert!(!seen.contains(&hash), "collision for {text}");
            seen.push(hash);
        }
        let again = parse_config("problem = \"perturbation-1d\"\n").unwrap();
        assert_eq!(again.content_hash(), seen[0], "hash must be reproducible");
    }

    #[test]
    fn monitor_overrides_layer_onto_problem_defaults() {
        let mut base = MonitorParams::default();
        let over = MonitorOverrides {
            variable: Some("depth".into()),
            theta: Some(42.0),
            laplacian_theta: Some(7.0),
            smoothing_passes: Some(2),
            ..MonitorOverrides::default()
        };
        over.apply(&mut base).unwrap();
        assert_eq!(base.components.len(), 1);
        assert!(matches!(base.components[0].variable, MonitorVariable::Depth));
        assert_eq!(base.components[0].theta, 42.0);
        let lap = base.laplacian.unwrap();
        assert_eq!(lap.theta, 7.0);
        assert_eq!(base.smoothing_passes, 2);

        let bad = MonitorOverrides { variable: Some("speed".into()), ..Default::default() };
        assert!(bad.apply(&mut MonitorParams::default()).is_err());
    }
}
