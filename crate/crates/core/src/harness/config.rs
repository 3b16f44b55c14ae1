//! Experiment configuration: a flat TOML file whose keys mirror
//! [`ExperimentConfig`]. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::bhi::DescentSettings;
use crate::error::{Error, Result};
use crate::manifolds::ManifoldKind;
use crate::thi::BaseRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldId {
    Sphere,
    So3,
    Euclidean,
}

impl ManifoldId {
    pub const ALL: [ManifoldId; 3] = [ManifoldId::Sphere, ManifoldId::So3, ManifoldId::Euclidean];

    pub fn name(self) -> &'static str {
        match self {
            ManifoldId::Sphere => "sphere",
            ManifoldId::So3 => "so3",
            ManifoldId::Euclidean => "euclidean",
        }
    }

    /// The Euclidean case is `R^3`, the codomain of the bundled saddle.
    pub fn kind(self) -> ManifoldKind {
        match self {
            ManifoldId::Sphere => ManifoldKind::Sphere,
            ManifoldId::So3 => ManifoldKind::So3,
            ManifoldId::Euclidean => ManifoldKind::Euclidean(3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunctionId {
    /// Helicoid Gauss map into S^2.
    GaussMap,
    /// Exponential of a parameterized skew matrix, into SO(3).
    So3Exp,
    /// Saddle surface in R^3.
    Saddle,
}

impl TestFunctionId {
    pub const ALL: [TestFunctionId; 3] = [
        TestFunctionId::GaussMap,
        TestFunctionId::So3Exp,
        TestFunctionId::Saddle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestFunctionId::GaussMap => "gauss_map",
            TestFunctionId::So3Exp => "so3_exp",
            TestFunctionId::Saddle => "saddle",
        }
    }

    pub fn manifold(self) -> ManifoldId {
        match self {
            TestFunctionId::GaussMap => ManifoldId::Sphere,
            TestFunctionId::So3Exp => ManifoldId::So3,
            TestFunctionId::Saddle => ManifoldId::Euclidean,
        }
    }

    pub fn input_dim(self) -> usize {
        2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanType {
    UniformGrid,
    Chebyshev,
}

impl PlanType {
    pub const ALL: [PlanType; 2] = [PlanType::UniformGrid, PlanType::Chebyshev];

    pub fn name(self) -> &'static str {
        match self {
            PlanType::UniformGrid => "uniform_grid",
            PlanType::Chebyshev => "chebyshev",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Bhi,
    Thi,
}

fn default_methods() -> Vec<Method> {
    vec![Method::Bhi, Method::Thi]
}
fn default_theta() -> Vec<f64> {
    vec![0.5, 0.5]
}
fn default_tau() -> f64 {
    1e-8
}
fn default_alpha() -> f64 {
    1.0
}
fn default_max_iter() -> usize {
    500
}
fn default_dt() -> f64 {
    1e-4
}
fn default_fd_step() -> f64 {
    1e-5
}
fn default_thi_base() -> String {
    "barycenter".into()
}
fn default_one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub manifold: ManifoldId,
    pub test_function: TestFunctionId,
    /// The parameter domain is `[domain_lower, domain_upper]^d`.
    pub domain_lower: f64,
    pub domain_upper: f64,
    pub plan: PlanType,
    pub samples_per_axis: usize,
    /// Evaluation grid points per axis, endpoints included.
    pub grid_resolution: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_theta")]
    pub theta: Vec<f64>,
    /// Gradient-norm stopping tolerance of the barycenter descent.
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Descent step size.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Step of the central difference for `d Log`.
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Step of the derivative check at the samples.
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    /// `"barycenter"` or `"sample:<j>"` with a 1-based index.
    #[serde(default = "default_thi_base")]
    pub thi_base: String,
    #[serde(default = "default_one")]
    pub threads: usize,
    #[serde(default)]
    pub stateless_bhi: bool,
    /// Offline timings report the fastest of this many builds.
    #[serde(default = "default_one")]
    pub timing_repeats: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("config key `{key}`: {msg}"))
}

impl ExperimentConfig {
    /// Parses and validates.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("config: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn input_dim(&self) -> usize {
        self.test_function.input_dim()
    }

    pub fn validate(&self) -> Result<()> {
        if self.test_function.manifold() != self.manifold {
            return Err(invalid(
                "test_function",
                format!(
                    "`{}` maps into `{}`, not `{}`",
                    self.test_function.name(),
                    self.test_function.manifold().name(),
                    self.manifold.name()
                ),
            ));
        }
        if !(self.domain_lower.is_finite() && self.domain_upper.is_finite()) {
            return Err(invalid("domain_lower", "domain bounds must be finite"));
        }
        if !(self.domain_upper > self.domain_lower) {
            return Err(invalid(
                "domain_upper",
                format!(
                    "must exceed domain_lower ({} <= {})",
                    self.domain_upper, self.domain_lower
                ),
            ));
        }
        if self.samples_per_axis < 1 {
            return Err(invalid("samples_per_axis", "must be at least 1"));
        }
        if self.grid_resolution < 2 {
            return Err(invalid("grid_resolution", "must be at least 2"));
        }
        if self.methods.is_empty() {
            return Err(invalid("methods", "no method selected"));
        }
        let d = self.input_dim();
        if self.theta.len() != d || self.theta.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(invalid(
                "theta",
                format!("need {d} positive finite entries"),
            ));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(invalid("tau", "must be finite and non-negative"));
        }
        for (key, v) in [
            ("alpha", self.alpha),
            ("dt", self.dt),
            ("fd_step", self.fd_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(key, "must be positive and finite"));
            }
        }
        if self.threads < 1 {
            return Err(invalid("threads", "must be at least 1"));
        }
        if self.timing_repeats < 1 {
            return Err(invalid("timing_repeats", "must be at least 1"));
        }
        let k = self.samples_per_axis.pow(d as u32);
        if let BaseRule::SampleIndex(j) = self.base_rule()? {
            if j >= k {
                return Err(invalid(
                    "thi_base",
                    format!("sample {} exceeds k = {k}", j + 1),
                ));
            }
        }
        Ok(())
    }

    pub fn base_rule(&self) -> Result<BaseRule> {
        let s = self.thi_base.trim();
        if s == "barycenter" {
            return Ok(BaseRule::Barycenter);
        }
        match s.strip_prefix("sample:").map(|n| n.trim().parse::<usize>()) {
            Some(Ok(j)) if j >= 1 => Ok(BaseRule::SampleIndex(j - 1)),
            _ => Err(invalid(
                "thi_base",
                format!("expected \"barycenter\" or \"sample:<j>\" with j >= 1, got {s:?}"),
            )),
        }
    }

    pub fn descent_settings(&self) -> DescentSettings {
        DescentSettings {
            step: self.alpha,
            tolerance: self.tau,
            max_iterations: self.max_iter,
        }
    }

    pub fn runs(&self, method: Method) -> bool {
        self.methods.contains(&method)
    }
}

/// Annotated template listing every key; required keys carry the S^2 reference
/// values, optional keys their defaults.
pub fn schema_template() -> String {
    format!(
        r#"# required
manifold = "sphere"            # sphere | so3 | euclidean
test_function = "gauss_map"    # gauss_map | so3_exp | saddle
domain_lower = -0.7853981633974483
domain_upper = 0.7853981633974483
plan = "uniform_grid"          # uniform_grid | chebyshev
samples_per_axis = 3
grid_resolution = 101

# optional (defaults shown)
methods = ["bhi", "thi"]
theta = [{t0:?}, {t1:?}]
tau = {tau:e}
alpha = {alpha:?}
max_iter = {max_iter}
dt = {dt:e}
fd_step = {fd:e}
thi_base = "{base}"       # barycenter | sample:<j>, j 1-based
threads = 1
stateless_bhi = false
timing_repeats = 1
# output_dir = "out"        # used when --out is not given
"#,
        t0 = default_theta()[0],
        t1 = default_theta()[1],
        tau = default_tau(),
        alpha = default_alpha(),
        max_iter = default_max_iter(),
        dt = default_dt(),
        fd = default_fd_step(),
        base = default_thi_base(),
    )
}
