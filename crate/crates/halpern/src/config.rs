//! Flat key=value experiment configuration: operator selection, schedule,
//! initial point, and output paths. The format is line-oriented so fixtures
//! diff cleanly; `#` starts a comment.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::operators::{self, NormKind, OperatorSpec};
use crate::rng::SplitMix64;
use crate::schedules::ScheduleKind;

/// How the initial point is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum X0Spec {
    /// explicit coordinates
    Literal(Vec<f64>),
    /// coordinates drawn U[-1,1] (or from the operator's domain sampler)
    /// from the seeded generator
    Random,
    /// the piecewise-linear witness start for the threshold map
    Witness,
}

/// Parsed experiment description. Build the runnable pieces with
/// [`ExperimentConfig::build_operator`] and [`ExperimentConfig::build_x0`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub operator: String,
    pub rho: f64,
    pub theta: f64,
    pub dim: usize,
    pub grid: usize,
    pub norm: Option<NormKind>,
    pub schedule: ScheduleKind,
    pub x0: X0Spec,
    pub seed: Option<u64>,
    pub n_max: usize,
    pub trace_csv: Option<String>,
    pub bounds_csv: Option<String>,
    pub svg: Option<String>,
}

const OPERATORS: &[&str] = &["rotation", "cyclic-shift", "goebel", "l1-shift"];

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|e| bad(format!("{key}: bad number '{v}': {e}")))?;
    if !x.is_finite() {
        return Err(bad(format!("{key}: must be finite, got '{v}'")));
    }
    Ok(x)
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|e| bad(format!("{key}: bad integer '{v}': {e}")))
}

impl ExperimentConfig {
    /// Parse the flat key=value text. Unknown keys are rejected; later
    /// occurrences of a key override earlier ones.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut operator: Option<String> = None;
        let mut rho: Option<f64> = None;
        let mut theta = FRAC_PI_2;
        let mut dim = 2usize;
        let mut grid = 64usize;
        let mut norm: Option<NormKind> = None;
        let mut schedule = ScheduleKind::MOpt;
        let mut x0 = X0Spec::Random;
        let mut seed: Option<u64> = None;
        let mut n_max = 100usize;
        let mut trace_csv = None;
        let mut bounds_csv = None;
        let mut svg = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key=value", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "operator" => {
                    if !OPERATORS.contains(&value) {
                        return Err(bad(format!(
                            "unknown operator '{value}' (expected one of {OPERATORS:?})"
                        )));
                    }
                    operator = Some(value.to_string());
                }
                "rho" => {
                    let v = parse_f64(key, value)?;
                    if v <= 0.0 {
                        return Err(bad(format!("rho must be positive, got {v}")));
                    }
                    rho = Some(v);
                }
                "theta" => theta = parse_f64(key, value)?,
                "dim" => {
                    dim = parse_usize(key, value)?;
                    if dim == 0 || dim > 1_000_000 {
                        return Err(bad(format!("dim out of range: {dim}")));
                    }
                }
                "grid" => {
                    grid = parse_usize(key, value)?;
                    if !(2..=1_000_000).contains(&grid) {
                        return Err(bad(format!("grid out of range: {grid}")));
                    }
                }
                "norm" => norm = Some(NormKind::parse(value)?),
                "schedule" => schedule = ScheduleKind::parse(value)?,
                "x0" => {
                    x0 = match value {
                        "random" => X0Spec::Random,
                        "witness" => X0Spec::Witness,
                        lit => {
                            let coords: Vec<f64> = lit
                                .split(',')
                                .map(|p| parse_f64("x0", p.trim()))
                                .collect::<Result<_>>()?;
                            if coords.is_empty() {
                                return Err(bad("x0: empty literal"));
                            }
                            X0Spec::Literal(coords)
                        }
                    }
                }
                "seed" => {
                    seed = Some(
                        value
                            .parse()
                            .map_err(|e| bad(format!("seed: bad integer '{value}': {e}")))?,
                    )
                }
                "n_max" => {
                    n_max = parse_usize(key, value)?;
                    if n_max > 100_000_000 {
                        return Err(bad(format!("n_max out of range: {n_max}")));
                    }
                }
                "trace_csv" => trace_csv = Some(value.to_string()),
                "bounds_csv" => bounds_csv = Some(value.to_string()),
                "svg" => svg = Some(value.to_string()),
                other => return Err(bad(format!("unknown key '{other}'"))),
            }
        }

        let operator = operator.ok_or_else(|| bad("missing required key 'operator'"))?;
        let rho = rho.ok_or_else(|| bad("missing required key 'rho'"))?;
        if x0 == X0Spec::Random && seed.is_none() {
            return Err(bad("x0=random requires a seed"));
        }
        if x0 == X0Spec::Witness && operator != "goebel" {
            return Err(bad("x0=witness is only defined for operator=goebel"));
        }
        Ok(ExperimentConfig {
            operator,
            rho,
            theta,
            dim,
            grid,
            norm,
            schedule,
            x0,
            seed,
            n_max,
            trace_csv,
            bounds_csv,
            svg,
        })
    }

    pub fn build_operator(&self) -> Result<OperatorSpec> {
        match self.operator.as_str() {
            "rotation" => {
                if self.norm.is_some() && self.norm != Some(NormKind::L2) {
                    return Err(bad("rotation uses the Euclidean norm"));
                }
                operators::rotation_contraction(self.rho, self.theta)
            }
            "cyclic-shift" => {
                operators::cyclic_shift(self.rho, self.dim, self.norm.unwrap_or(NormKind::LInf))
            }
            "goebel" => {
                if self.norm.is_some() && self.norm != Some(NormKind::LInf) {
                    return Err(bad("goebel uses the sup norm"));
                }
                operators::goebel_map(self.rho, self.grid)
            }
            "l1-shift" => {
                if self.norm.is_some() && self.norm != Some(NormKind::L1) {
                    return Err(bad("l1-shift uses the l1 norm"));
                }
                operators::l1_right_shift(self.rho, self.dim)
            }
            other => Err(bad(format!("unknown operator '{other}'"))),
        }
    }

    pub fn build_x0(&self, op: &OperatorSpec) -> Result<Vec<f64>> {
        match &self.x0 {
            X0Spec::Literal(v) => {
                if v.len() != op.dim {
                    return Err(Error::DimensionMismatch {
                        expected: op.dim,
                        got: v.len(),
                    });
                }
                if !op.in_domain(v) {
                    return Err(Error::DomainViolation { step: 0 });
                }
                Ok(v.clone())
            }
            X0Spec::Random => {
                let seed = self.seed.ok_or_else(|| bad("x0=random requires a seed"))?;
                let mut rng = SplitMix64::new(seed);
                Ok(op.sample_domain(&mut rng))
            }
            X0Spec::Witness => operators::goebel_witness_x0(self.grid, self.n_max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let c = ExperimentConfig::parse("operator = rotation\nrho = 0.98\nseed = 42\n").unwrap();
        assert_eq!(c.operator, "rotation");
        assert_eq!(c.rho, 0.98);
        assert_eq!(c.schedule, ScheduleKind::MOpt);
        assert_eq!(c.x0, X0Spec::Random);
    }

    #[test]
    fn parses_full_config_with_comments() {
        let text = "\
# fixture
operator = cyclic-shift   # operator family
rho = 1.5
dim = 10
norm = linf
schedule = ada
x0 = 1, 0, 0, 0, 0, 0, 0, 0, 0, 0
n_max = 2000
trace_csv = out/trace.csv
svg = out/plot.svg
";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.dim, 10);
        assert_eq!(c.schedule, ScheduleKind::Ada);
        assert_eq!(c.x0, X0Spec::Literal(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!(c.trace_csv.as_deref(), Some("out/trace.csv"));
        let op = c.build_operator().unwrap();
        assert_eq!(op.dim, 10);
        let x0 = c.build_x0(&op).unwrap();
        assert_eq!(x0.len(), 10);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ExperimentConfig::parse("operator = nonsense\nrho = 1\nseed = 1").is_err());
        assert!(ExperimentConfig::parse("rho = 1\nseed = 1").is_err());
        assert!(ExperimentConfig::parse("operator = rotation\nseed = 1").is_err());
        assert!(ExperimentConfig::parse("operator = rotation\nrho = 0.9").is_err());
        assert!(ExperimentConfig::parse("operator = rotation\nrho = inf\nseed = 1").is_err());
        assert!(ExperimentConfig::parse("operator = rotation\nrho = 0.9\nseed = 1\nbogus = 3").is_err());
        assert!(ExperimentConfig::parse("operator = rotation\nrho = 0.9\nseed = 1\nnoequals").is_err());
        assert!(ExperimentConfig::parse("operator = l1-shift\nrho = 0.8\nx0 = witness").is_err());
    }

    #[test]
    fn random_x0_deterministic() {
        let text = "operator = cyclic-shift\nrho = 0.98\ndim = 100\nseed = 42";
        let c = ExperimentConfig::parse(text).unwrap();
        let op = c.build_operator().unwrap();
        let a = c.build_x0(&op).unwrap();
        let b = c.build_x0(&op).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn witness_config_builds() {
        let text = "operator = goebel\nrho = 2\ngrid = 64\nx0 = witness\nn_max = 50\nschedule = bp";
        let c = ExperimentConfig::parse(text).unwrap();
        let op = c.build_operator().unwrap();
        let x0 = c.build_x0(&op).unwrap();
        assert!(op.in_domain(&x0));
    }
}
