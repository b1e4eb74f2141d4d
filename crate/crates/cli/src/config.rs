//! Run configuration: a TOML file merged with command-line flags.

use std::path::{Path, PathBuf};

use anisojump::geometry::{InterfaceCurve, Vec2};
use anisojump::manufactured::{builtin_case, ManufacturedCase, BUILTIN_CASES};
use anisojump::solver::GridSpec;
use anisojump::tensor::{variable_family, AnisoTensor, Sym2, VARIABLE_FAMILIES};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyRelations,
    RotateTensor,
    Convergence,
    OracleFuzz,
}

/// Tensor of one side: either three entries or a named variable family.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorConfig {
    pub a11: Option<f64>,
    pub a12: Option<f64>,
    pub a22: Option<f64>,
    pub family: Option<String>,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
pub enum CurveShapeConfig {
    Circle,
    Ellipse,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub shape: CurveShapeConfig,
    #[serde(default)]
    pub center: [f64; 2],
    pub radius: Option<f64>,
    pub semi_axes: Option<[f64; 2]>,
    #[serde(default)]
    pub rotation: f64,
    /// Put Ω⁻ outside the curve.
    #[serde(default)]
    pub minus_outside: bool,
}

/// Everything a config file may contain.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<Command>,
    pub case: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub strict_paper: Option<bool>,
    pub n: Option<Vec<usize>>,
    pub draws: Option<usize>,
    pub points: Option<usize>,
    pub corrections: Option<bool>,
    pub theta: Option<f64>,
    pub tensor: Option<TensorConfig>,
    pub tensor_minus: Option<TensorConfig>,
    pub tensor_plus: Option<TensorConfig>,
    pub curve: Option<CurveConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// Validated configuration for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    /// `None` means every applicable built-in case.
    pub cases: Option<Vec<ManufacturedCase>>,
    pub out: PathBuf,
    pub seed: u64,
    pub strict_paper: bool,
    pub n: Vec<usize>,
    pub draws: usize,
    pub points: usize,
    pub corrections: bool,
    pub theta: f64,
    pub tensor: Option<Sym2>,
}

pub const DEFAULT_N: [usize; 3] = [32, 64, 128];
pub const DEFAULT_POINTS: usize = 64;

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

fn constant_entries(t: &TensorConfig, what: &str) -> Result<Sym2, ConfigError> {
    match (t.a11, t.a12, t.a22) {
        (Some(a11), Some(a12), Some(a22)) => Ok(Sym2::new(a11, a12, a22)),
        _ => Err(invalid(format!(
            "{what}: give all of a11, a12, a22 or a family name"
        ))),
    }
}

fn build_tensor(
    t: &TensorConfig,
    what: &str,
    default_sigma: f64,
) -> Result<AnisoTensor, ConfigError> {
    let sigma = t.sigma.unwrap_or(default_sigma);
    let has_entries = t.a11.is_some() || t.a12.is_some() || t.a22.is_some();
    match (&t.family, has_entries) {
        (Some(_), true) => Err(invalid(format!(
            "{what}: entries and family are mutually exclusive"
        ))),
        (Some(name), false) => {
            let field = variable_family(name).ok_or_else(|| {
                invalid(format!(
                    "{what}: unknown family {name:?} (known: {})",
                    VARIABLE_FAMILIES.join(", ")
                ))
            })?;
            let samples: Vec<Vec2> = (0..=20)
                .flat_map(|j| {
                    (0..=20).map(move |i| Vec2::new(-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64))
                })
                .collect();
            AnisoTensor::variable(field, sigma, &samples, 1e-3)
                .map_err(|e| invalid(format!("{what}: {e}")))
        }
        (None, _) => {
            let a = constant_entries(t, what)?;
            AnisoTensor::constant(a, sigma).map_err(|e| invalid(format!("{what}: {e}")))
        }
    }
}

fn build_curve(c: &CurveConfig) -> Result<InterfaceCurve, ConfigError> {
    let center = Vec2::new(c.center[0], c.center[1]);
    let curve = match c.shape {
        CurveShapeConfig::Circle => {
            let r = c
                .radius
                .ok_or_else(|| invalid("curve: circle needs radius"))?;
            InterfaceCurve::circle(center, r)
        }
        CurveShapeConfig::Ellipse => {
            let [a, b] = c
                .semi_axes
                .ok_or_else(|| invalid("curve: ellipse needs semi_axes"))?;
            InterfaceCurve::ellipse(center, (a, b), c.rotation)
        }
    }
    .map_err(|e| invalid(format!("curve: {e}")))?;
    Ok(if c.minus_outside {
        curve.with_minus_outside()
    } else {
        curve
    })
}

/// Command-line values; `None` defers to the config file, then to defaults.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub case: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub strict_paper: bool,
    pub n: Vec<usize>,
    pub draws: Option<usize>,
    pub points: Option<usize>,
    pub no_corrections: bool,
    pub theta: Option<f64>,
    pub tensor: Option<[f64; 3]>,
}

impl RunConfig {
    pub fn resolve(file: FileConfig, flags: Overrides) -> Result<Self, ConfigError> {
        let command = flags
            .command
            .or(file.command)
            .ok_or_else(|| invalid("no command given"))?;
        let case_name = flags.case.or(file.case);
        let custom =
            file.tensor_minus.is_some() || file.tensor_plus.is_some() || file.curve.is_some();

        let cases = match (&case_name, custom) {
            (None, false) => None,
            (name, _) => {
                let base_name = name.clone().unwrap_or_else(|| "coupled-circle".to_string());
                let mut case = builtin_case(&base_name).ok_or_else(|| {
                    invalid(format!(
                        "unknown case {base_name:?} (known: {})",
                        BUILTIN_CASES.join(", ")
                    ))
                })?;
                if let Some(t) = &file.tensor_minus {
                    case.tensor_minus = build_tensor(t, "tensor_minus", case.tensor_minus.sigma())?;
                }
                if let Some(t) = &file.tensor_plus {
                    case.tensor_plus = build_tensor(t, "tensor_plus", case.tensor_plus.sigma())?;
                }
                if let Some(c) = &file.curve {
                    case.curve = build_curve(c)?;
                }
                if custom {
                    case.name = format!("{base_name}-custom");
                }
                Some(vec![case])
            }
        };

        let n = if !flags.n.is_empty() {
            flags.n
        } else {
            file.n.unwrap_or_else(|| DEFAULT_N.to_vec())
        };
        if n.iter().any(|k| *k < GridSpec::MIN_CELLS) {
            return Err(invalid(format!(
                "grid sizes must be at least {}, got {n:?}",
                GridSpec::MIN_CELLS
            )));
        }
        if n.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid(format!(
                "grid sizes must be strictly ascending, got {n:?}"
            )));
        }
        let draws = flags
            .draws
            .or(file.draws)
            .unwrap_or(anisojump::audit::DEFAULT_DRAWS);
        let points = flags.points.or(file.points).unwrap_or(DEFAULT_POINTS);
        if draws == 0 || points == 0 {
            return Err(invalid("draws and points must be positive"));
        }

        let tensor = match (flags.tensor, &file.tensor) {
            (Some([a11, a12, a22]), _) => Some(Sym2::new(a11, a12, a22)),
            (None, Some(t)) => {
                if t.family.is_some() || t.sigma.is_some() {
                    return Err(invalid("tensor: only a11, a12, a22 apply to rotate-tensor"));
                }
                Some(constant_entries(t, "tensor")?)
            }
            (None, None) => None,
        };
        if command == Command::RotateTensor && tensor.is_none() {
            return Err(invalid(
                "rotate-tensor needs --tensor A11,A12,A22 or a [tensor] table",
            ));
        }

        Ok(Self {
            command,
            cases,
            out: flags
                .out
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("out")),
            seed: flags
                .seed
                .or(file.seed)
                .unwrap_or(anisojump::audit::DEFAULT_SEED),
            strict_paper: flags.strict_paper || file.strict_paper.unwrap_or(false),
            n,
            draws,
            points,
            corrections: !flags.no_corrections && file.corrections.unwrap_or(true),
            theta: flags.theta.or(file.theta).unwrap_or(0.0),
            tensor,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<FileConfig, toml::de::Error> {
        toml::from_str(text)
    }

    fn flags(command: Command) -> Overrides {
        Overrides {
            command: Some(command),
            ..Default::default()
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse("case = \"coupled-circle\"\ncolour = 3\n").is_err());
        assert!(parse("[tensor_plus]\na11 = 1.0\nb = 2.0\n").is_err());
        assert!(parse("[curve]\nshape = \"square\"\n").is_err());
    }

    #[test]
    fn full_config_round_trip() {
        let file = parse(
            r#"
command = "convergence"
case = "scalar-benchmark"
n = [16, 32]
seed = 5
out = "results"

[tensor_plus]
a11 = 4.0
a12 = 0.5
a22 = 2.0
sigma = 0.1

[curve]
shape = "ellipse"
semi_axes = [0.6, 0.4]
rotation = 0.3
"#,
        )
        .unwrap();
        let cfg = RunConfig::resolve(file, Overrides::default()).unwrap();
        assert_eq!(cfg.command, Command::Convergence);
        assert_eq!(cfg.n, vec![16, 32]);
        let case = &cfg.cases.unwrap()[0];
        assert_eq!(case.name, "scalar-benchmark-custom");
        assert_eq!(
            case.tensor_plus.constant_value(),
            Some(Sym2::new(4.0, 0.5, 2.0))
        );
        assert_eq!(case.tensor_plus.sigma(), 0.1);
    }

    #[test]
    fn flags_override_file() {
        let file = parse("case = \"coupled-circle\"\nseed = 1\nn = [16, 32]\n").unwrap();
        let cfg = RunConfig::resolve(
            file,
            Overrides {
                seed: Some(9),
                n: vec![8, 12],
                case: Some("isotropic-ellipse".into()),
                ..flags(Command::OracleFuzz)
            },
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.n, vec![8, 12]);
        assert_eq!(cfg.cases.unwrap()[0].name, "isotropic-ellipse");
    }

    #[test]
    fn invalid_values_are_reported() {
        let bad = [
            ("case = \"nope\"", Command::VerifyRelations),
            ("n = [64, 32]", Command::Convergence),
            ("n = [4]", Command::Convergence),
            (
                "[tensor_minus]\na11 = 1.0\na12 = 2.0\na22 = 1.0",
                Command::VerifyRelations,
            ),
            (
                "[tensor_minus]\nfamily = \"unknown\"",
                Command::VerifyRelations,
            ),
            (
                "[tensor_minus]\nfamily = \"linear-x\"\na11 = 1.0",
                Command::VerifyRelations,
            ),
            ("[curve]\nshape = \"circle\"", Command::VerifyRelations),
            ("draws = 0", Command::OracleFuzz),
            ("", Command::RotateTensor),
        ];
        for (text, command) in bad {
            let r = RunConfig::resolve(parse(text).unwrap(), flags(command));
            assert!(r.is_err(), "{text:?} accepted");
        }
        assert!(RunConfig::resolve(FileConfig::default(), Overrides::default()).is_err());
    }

    #[test]
    fn variable_family_from_config() {
        let file = parse("[tensor_plus]\nfamily = \"trig-coupled\"\nsigma = 0.5").unwrap();
        let cfg = RunConfig::resolve(file, flags(Command::VerifyRelations)).unwrap();
        assert!(!cfg.cases.unwrap()[0].tensor_plus.is_constant());
    }

    #[test]
    fn tensor_for_rotation() {
        let file = parse("theta = 1.5\n[tensor]\na11 = 2.0\na12 = 1.0\na22 = 3.0").unwrap();
        let cfg = RunConfig::resolve(file, flags(Command::RotateTensor)).unwrap();
        assert_eq!(cfg.tensor, Some(Sym2::new(2.0, 1.0, 3.0)));
        assert_eq!(cfg.theta, 1.5);
    }
}
