//! Config resolution: defaults, overridden by a flat `key = value` config
//! file (`--config` flag, else the `CURVPEND_CONFIG` env var), overridden by
//! command-line flags. Config keys are exactly the long flag names.

use crate::{CliError, Flags};
use curvpend::model::AccelSegment;
use curvpend::{Method, PivotMotion};
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Fully resolved run settings; every field has a concrete value except the
/// optional output path.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub curvature: f64,
    pub rod_length: f64,
    pub mass: f64,
    pub speed: f64,
    pub accel: AccelSpec,
    pub zeta0: f64,
    pub zeta_dot0: f64,
    pub elastic: bool,
    pub spring_k: f64,
    pub l0: f64,
    pub l_dot0: f64,
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub embed: bool,
    pub hbar: f64,
    pub grid_n: usize,
    pub n_levels: usize,
    pub output: Option<PathBuf>,
    pub sample_stride: usize,
    pub portrait_grid: PortraitGrid,
}

/// Pivot acceleration profile as given on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum AccelSpec {
    None,
    Const(f64),
    Sin { amplitude: f64, angular_freq: f64 },
    Piecewise(Vec<AccelSegment>),
}

impl AccelSpec {
    /// `none` | `const:a` | `sin:A,omega` | `piecewise:t0,a0;t1,a1;...`
    fn parse(s: &str) -> Result<Self, String> {
        let num = |part: &str, what: &str| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| format!("{what} in --accel is not a number: {part:?}"))
        };
        if s == "none" {
            return Ok(AccelSpec::None);
        }
        if let Some(rest) = s.strip_prefix("const:") {
            return Ok(AccelSpec::Const(num(rest, "acceleration")?));
        }
        if let Some(rest) = s.strip_prefix("sin:") {
            let (a, w) = rest
                .split_once(',')
                .ok_or_else(|| format!("sin profile needs amplitude,angular-freq, got {rest:?}"))?;
            return Ok(AccelSpec::Sin {
                amplitude: num(a, "amplitude")?,
                angular_freq: num(w, "angular frequency")?,
            });
        }
        if let Some(rest) = s.strip_prefix("piecewise:") {
            let mut segments = Vec::new();
            for piece in rest.split(';') {
                let (t, a) = piece
                    .split_once(',')
                    .ok_or_else(|| format!("piecewise segment needs start,accel, got {piece:?}"))?;
                segments.push(AccelSegment {
                    start: num(t, "segment start")?,
                    accel: num(a, "segment acceleration")?,
                });
            }
            return Ok(AccelSpec::Piecewise(segments));
        }
        Err(format!(
            "unknown acceleration profile {s:?}; expected none, const:a, sin:A,omega, or piecewise:t0,a0;t1,a1;..."
        ))
    }

    pub fn is_none(&self) -> bool {
        matches!(self, AccelSpec::None)
    }

    /// Converts to the model's motion type, folding in the initial speed.
    pub fn to_motion(&self, speed: f64) -> PivotMotion {
        match self {
            AccelSpec::None => PivotMotion::ConstantSpeed(speed),
            AccelSpec::Const(a) => PivotMotion::PiecewiseAccel {
                initial_speed: speed,
                segments: vec![AccelSegment {
                    start: 0.0,
                    accel: *a,
                }],
            },
            AccelSpec::Sin {
                amplitude,
                angular_freq,
            } => PivotMotion::SinusoidalAccel {
                amplitude: *amplitude,
                angular_freq: *angular_freq,
                initial_speed: speed,
            },
            AccelSpec::Piecewise(segments) => PivotMotion::PiecewiseAccel {
                initial_speed: speed,
                segments: segments.clone(),
            },
        }
    }
}

/// Rectangular grid of initial conditions for the phase portrait.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortraitGrid {
    pub zeta: (f64, f64, usize),
    pub zeta_dot: (f64, f64, usize),
}

impl PortraitGrid {
    /// `zmin:zmax:nz,vmin:vmax:nv`
    fn parse(s: &str) -> Result<Self, String> {
        let axis = |part: &str, name: &str| -> Result<(f64, f64, usize), String> {
            let fields: Vec<&str> = part.split(':').collect();
            if fields.len() != 3 {
                return Err(format!("{name} axis must be lo:hi:n, got {part:?}"));
            }
            let lo: f64 = fields[0]
                .trim()
                .parse()
                .map_err(|_| format!("{name} lower bound is not a number: {:?}", fields[0]))?;
            let hi: f64 = fields[1]
                .trim()
                .parse()
                .map_err(|_| format!("{name} upper bound is not a number: {:?}", fields[1]))?;
            let n: usize = fields[2]
                .trim()
                .parse()
                .map_err(|_| format!("{name} point count is not an integer: {:?}", fields[2]))?;
            if n == 0 {
                return Err(format!("{name} point count must be at least 1"));
            }
            if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
                return Err(format!("{name} bounds must be finite with hi >= lo"));
            }
            Ok((lo, hi, n))
        };
        let (z_part, v_part) = s
            .split_once(',')
            .ok_or_else(|| format!("grid must be z-axis,v-axis, got {s:?}"))?;
        Ok(PortraitGrid {
            zeta: axis(z_part, "zeta")?,
            zeta_dot: axis(v_part, "zeta-dot")?,
        })
    }

    pub fn axis_points((lo, hi, n): (f64, f64, usize)) -> Vec<f64> {
        if n == 1 {
            return vec![lo];
        }
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

impl Default for PortraitGrid {
    fn default() -> Self {
        PortraitGrid {
            zeta: (-std::f64::consts::PI, std::f64::consts::PI, 41),
            zeta_dot: (-3.0, 3.0, 41),
        }
    }
}

/// One config-file entry, kept as raw text until merged.
#[derive(Debug, Default)]
struct FileValues {
    entries: Vec<(String, String)>,
}

const KNOWN_KEYS: &[&str] = &[
    "curvature",
    "rod-length",
    "mass",
    "speed",
    "accel",
    "zeta0",
    "zeta-dot0",
    "elastic",
    "spring-k",
    "l0",
    "l-dot0",
    "dt",
    "t-end",
    "integrator",
    "rel-tol",
    "abs-tol",
    "embed",
    "hbar",
    "grid-n",
    "n-levels",
    "output",
    "degrees",
    "sample-stride",
    "portrait-grid",
];

fn parse_file(path: &Path) -> Result<FileValues, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::config(format!("cannot read config file {}: {e}", path.display()))
    })?;
    let mut values = FileValues::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::config(format!(
                "{}:{}: expected `key = value`, got {line:?}",
                path.display(),
                lineno + 1
            ))
        })?;
        let key = key.trim();
        let value = value.trim();
        if key == "config" {
            return Err(CliError::config(format!(
                "{}:{}: a config file cannot name another config file",
                path.display(),
                lineno + 1
            )));
        }
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::config(format!(
                "{}:{}: unknown config key {key:?}",
                path.display(),
                lineno + 1
            )));
        }
        // Later lines override earlier ones.
        values.entries.retain(|(k, _)| k != key);
        values.entries.push((key.to_string(), value.to_string()));
    }
    Ok(values)
}

impl FileValues {
    fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::config(format!("config key {key:?} has invalid value {raw:?}"))
            }),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some("true") => Ok(Some(true)),
            Some("false") => Ok(Some(false)),
            Some(other) => Err(CliError::config(format!(
                "config key {key:?} must be true or false, got {other:?}"
            ))),
        }
    }
}

/// Builds the effective configuration: defaults < config file < flags.
/// The `--degrees` switch converts the resolved zeta0 / zeta-dot0 from
/// degrees to radians as the final step.
pub fn resolve(flags: &Flags) -> Result<RunConfig, CliError> {
    let file = match flags
        .config
        .clone()
        .or_else(|| std::env::var_os("CURVPEND_CONFIG").map(PathBuf::from))
    {
        Some(path) => parse_file(&path)?,
        None => FileValues::default(),
    };

    let accel_text = flags
        .accel
        .clone()
        .or_else(|| file.get("accel").map(str::to_string));
    let accel = match accel_text {
        None => AccelSpec::None,
        Some(text) => AccelSpec::parse(&text).map_err(CliError::config)?,
    };

    let integrator_text = flags
        .integrator
        .clone()
        .or_else(|| file.get("integrator").map(str::to_string));
    let integrator = match integrator_text {
        None => Method::Rk4,
        Some(text) => text
            .parse::<Method>()
            .map_err(|e| CliError::config(format!("{e}")))?,
    };

    let portrait_text = flags
        .portrait_grid
        .clone()
        .or_else(|| file.get("portrait-grid").map(str::to_string));
    let portrait_grid = match portrait_text {
        None => PortraitGrid::default(),
        Some(text) => PortraitGrid::parse(&text).map_err(CliError::config)?,
    };

    let degrees = flags.degrees || file.boolean("degrees")?.unwrap_or(false);
    let angle_scale = if degrees {
        std::f64::consts::PI / 180.0
    } else {
        1.0
    };

    let zeta0 = flags.zeta0.or(file.parsed("zeta0")?).unwrap_or(0.5);
    let zeta_dot0 = flags.zeta_dot0.or(file.parsed("zeta-dot0")?).unwrap_or(0.0);

    Ok(RunConfig {
        curvature: flags.curvature.or(file.parsed("curvature")?).unwrap_or(1.0),
        rod_length: flags
            .rod_length
            .or(file.parsed("rod-length")?)
            .unwrap_or(1.0),
        mass: flags.mass.or(file.parsed("mass")?).unwrap_or(1.0),
        speed: flags.speed.or(file.parsed("speed")?).unwrap_or(1.0),
        accel,
        zeta0: zeta0 * angle_scale,
        zeta_dot0: zeta_dot0 * angle_scale,
        elastic: flags.elastic || file.boolean("elastic")?.unwrap_or(false),
        spring_k: flags.spring_k.or(file.parsed("spring-k")?).unwrap_or(1.0),
        l0: flags.l0.or(file.parsed("l0")?).unwrap_or(0.0),
        l_dot0: flags.l_dot0.or(file.parsed("l-dot0")?).unwrap_or(0.0),
        dt: flags.dt.or(file.parsed("dt")?).unwrap_or(1e-3),
        t_end: flags.t_end.or(file.parsed("t-end")?).unwrap_or(10.0),
        integrator,
        rel_tol: flags.rel_tol.or(file.parsed("rel-tol")?).unwrap_or(1e-6),
        abs_tol: flags.abs_tol.or(file.parsed("abs-tol")?).unwrap_or(1e-9),
        embed: flags.embed || file.boolean("embed")?.unwrap_or(false),
        hbar: flags.hbar.or(file.parsed("hbar")?).unwrap_or(0.01),
        grid_n: flags.grid_n.or(file.parsed("grid-n")?).unwrap_or(512),
        n_levels: flags.n_levels.or(file.parsed("n-levels")?).unwrap_or(8),
        output: flags.output.clone().or(file.parsed::<PathBuf>("output")?),
        sample_stride: flags
            .sample_stride
            .or(file.parsed("sample-stride")?)
            .unwrap_or(1),
        portrait_grid,
    })
}
