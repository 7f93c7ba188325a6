//! Flat `key = value` solver configuration.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{FbpError, Result};
use crate::kinetics::TemplateConstants;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelName {
    /// Manufactured test problem with its exact-solution forcing attached.
    Example1,
    /// The biological model with the saturating rate parameterization.
    FullTemplate,
}

impl ModelName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelName::Example1 => "example-1",
            ModelName::FullTemplate => "full-template",
        }
    }
}

impl FromStr for ModelName {
    type Err = FbpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "example-1" => Ok(ModelName::Example1),
            "full-template" => Ok(ModelName::FullTemplate),
            other => Err(FbpError::Config(format!(
                "unknown model `{other}` (expected `example-1` or `full-template`)"
            ))),
        }
    }
}

/// How the nutrient/drug solves leave `t_0`, where the two-level scheme
/// has no `t_{-1}` data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Startup {
    /// One implicit one-level step.
    Implicit,
    /// Two-level scheme with `u_{-1} := u_0`, `v(1, t_{-1}) := v(1, t_0)` and
    /// `f_{-1} := f_0`.
    Copy,
}

impl Startup {
    pub fn as_str(&self) -> &'static str {
        match self {
            Startup::Implicit => "implicit",
            Startup::Copy => "copy",
        }
    }
}

impl FromStr for Startup {
    type Err = FbpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "implicit" => Ok(Startup::Implicit),
            "copy" => Ok(Startup::Copy),
            other => Err(FbpError::Config(format!(
                "unknown startup `{other}` (expected `implicit` or `copy`)"
            ))),
        }
    }
}

/// Every tunable of a run. Config-file keys are exactly these field names.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub alpha: f64,
    pub t_final: f64,
    /// Number of time steps `M`; `t* = t_final / steps`.
    pub steps: usize,
    /// Spectral degree `N` (the expansion has `N + 1` coefficients).
    pub degree: usize,
    /// Cells of the uniform transport grid `N_h`.
    pub grid_cells: usize,
    pub d1: f64,
    pub d2: f64,
    pub r0: f64,
    pub model: ModelName,
    pub n_total: f64,
    pub k_r: f64,
    pub rates: TemplateConstants,
    /// Boundary supply of nutrient and drug (constant in time).
    pub c_bar: f64,
    pub w_bar: f64,
    /// Initial proliferative/quiescent profiles of the template model:
    /// `center + (edge - center) rho^2`; dead cells fill up to `n_total`.
    pub p0_center: f64,
    pub p0_edge: f64,
    pub q0_center: f64,
    pub q0_edge: f64,
    pub startup: Startup,
    pub strict_aprime_n_zero: bool,
    /// Nodes of the Gauss–Jacobi rule used by the manufactured forcing.
    pub quad_order: usize,
    pub output_stride: usize,
    /// Not part of the config hash.
    pub output_dir: Option<String>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            alpha: 0.1,
            t_final: 1.0,
            steps: 1000,
            degree: 20,
            grid_cells: 200,
            d1: 1.0 / 12.0,
            d2: 1.0 / 12.0,
            r0: 0.5,
            model: ModelName::Example1,
            n_total: 1.0,
            k_r: 0.2,
            rates: TemplateConstants::default(),
            c_bar: 0.0,
            w_bar: 0.0,
            p0_center: 0.3,
            p0_edge: 0.6,
            q0_center: 0.4,
            q0_edge: 0.3,
            startup: Startup::Implicit,
            strict_aprime_n_zero: false,
            quad_order: 32,
            output_stride: 1,
            output_dir: None,
        }
    }
}

/// All keys in canonical order.
pub const KEYS: &[&str] = &[
    "alpha",
    "t_final",
    "steps",
    "degree",
    "grid_cells",
    "d1",
    "d2",
    "r0",
    "model",
    "n_total",
    "k_r",
    "k_b",
    "k_q",
    "k_a",
    "k_p",
    "k_d",
    "g1",
    "g2",
    "k1",
    "k2",
    "k3",
    "k4",
    "c_bar",
    "w_bar",
    "p0_center",
    "p0_edge",
    "q0_center",
    "q0_edge",
    "startup",
    "strict_aprime_n_zero",
    "quad_order",
    "output_stride",
    "output_dir",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| FbpError::Config(format!("invalid value `{value}` for `{key}`")))
}

impl SolverConfig {
    /// Full-template defaults: nutrient supplied at the boundary, a
    /// population already at its total density.
    pub fn full_template() -> Self {
        SolverConfig {
            model: ModelName::FullTemplate,
            c_bar: 1.0,
            w_bar: 0.5,
            ..Default::default()
        }
    }

    pub fn t_star(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "alpha" => self.alpha = parse_num(key, v)?,
            "t_final" => self.t_final = parse_num(key, v)?,
            "steps" => self.steps = parse_num(key, v)?,
            "degree" => self.degree = parse_num(key, v)?,
            "grid_cells" => self.grid_cells = parse_num(key, v)?,
            "d1" => self.d1 = parse_num(key, v)?,
            "d2" => self.d2 = parse_num(key, v)?,
            "r0" => self.r0 = parse_num(key, v)?,
            "model" => self.model = v.parse()?,
            "n_total" => self.n_total = parse_num(key, v)?,
            "k_r" => self.k_r = parse_num(key, v)?,
            "k_b" => self.rates.k_b = parse_num(key, v)?,
            "k_q" => self.rates.k_q = parse_num(key, v)?,
            "k_a" => self.rates.k_a = parse_num(key, v)?,
            "k_p" => self.rates.k_p = parse_num(key, v)?,
            "k_d" => self.rates.k_d = parse_num(key, v)?,
            "g1" => self.rates.g1 = parse_num(key, v)?,
            "g2" => self.rates.g2 = parse_num(key, v)?,
            "k1" => self.rates.k1 = parse_num(key, v)?,
            "k2" => self.rates.k2 = parse_num(key, v)?,
            "k3" => self.rates.k3 = parse_num(key, v)?,
            "k4" => self.rates.k4 = parse_num(key, v)?,
            "c_bar" => self.c_bar = parse_num(key, v)?,
            "w_bar" => self.w_bar = parse_num(key, v)?,
            "p0_center" => self.p0_center = parse_num(key, v)?,
            "p0_edge" => self.p0_edge = parse_num(key, v)?,
            "q0_center" => self.q0_center = parse_num(key, v)?,
            "q0_edge" => self.q0_edge = parse_num(key, v)?,
            "startup" => self.startup = v.parse()?,
            "strict_aprime_n_zero" => self.strict_aprime_n_zero = parse_num(key, v)?,
            "quad_order" => self.quad_order = parse_num(key, v)?,
            "output_stride" => self.output_stride = parse_num(key, v)?,
            "output_dir" => self.output_dir = Some(v.to_string()),
            other => return Err(FbpError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    fn get(&self, key: &str) -> String {
        let r = &self.rates;
        match key {
            "alpha" => format!("{:?}", self.alpha),
            "t_final" => format!("{:?}", self.t_final),
            "steps" => self.steps.to_string(),
            "degree" => self.degree.to_string(),
            "grid_cells" => self.grid_cells.to_string(),
            "d1" => format!("{:?}", self.d1),
            "d2" => format!("{:?}", self.d2),
            "r0" => format!("{:?}", self.r0),
            "model" => self.model.as_str().to_string(),
            "n_total" => format!("{:?}", self.n_total),
            "k_r" => format!("{:?}", self.k_r),
            "k_b" => format!("{:?}", r.k_b),
            "k_q" => format!("{:?}", r.k_q),
            "k_a" => format!("{:?}", r.k_a),
            "k_p" => format!("{:?}", r.k_p),
            "k_d" => format!("{:?}", r.k_d),
            "g1" => format!("{:?}", r.g1),
            "g2" => format!("{:?}", r.g2),
            "k1" => format!("{:?}", r.k1),
            "k2" => format!("{:?}", r.k2),
            "k3" => format!("{:?}", r.k3),
            "k4" => format!("{:?}", r.k4),
            "c_bar" => format!("{:?}", self.c_bar),
            "w_bar" => format!("{:?}", self.w_bar),
            "p0_center" => format!("{:?}", self.p0_center),
            "p0_edge" => format!("{:?}", self.p0_edge),
            "q0_center" => format!("{:?}", self.q0_center),
            "q0_edge" => format!("{:?}", self.q0_edge),
            "startup" => self.startup.as_str().to_string(),
            "strict_aprime_n_zero" => self.strict_aprime_n_zero.to_string(),
            "quad_order" => self.quad_order.to_string(),
            "output_stride" => self.output_stride.to_string(),
            "output_dir" => self.output_dir.clone().unwrap_or_default(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Parses `key = value` lines on top of the defaults of the model named in
    /// the text (`example-1` when absent). `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                FbpError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut cfg = match pairs.iter().rev().find(|(k, _)| k == "model") {
            Some((_, v)) if v.parse::<ModelName>()? == ModelName::FullTemplate => Self::full_template(),
            _ => Self::default(),
        };
        for (k, v) in pairs {
            cfg.set(&k, &v)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Every key in canonical order, one `key = value` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            if *key == "output_dir" && self.output_dir.is_none() {
                continue;
            }
            let _ = writeln!(out, "{key} = {}", self.get(key));
        }
        out
    }

    /// Short stable digest of everything that influences the numerics.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for key in KEYS.iter().filter(|k| **k != "output_dir" && **k != "output_stride") {
            hasher.update(format!("{key}={}\n", self.get(key)).as_bytes());
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FbpError::Config(msg));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.t_final > 0.0) {
            return bad(format!("t_final must be > 0, got {}", self.t_final));
        }
        if self.steps < 1 {
            return bad("steps must be >= 1".into());
        }
        if self.grid_cells < 4 {
            return bad(format!("grid_cells must be >= 4, got {}", self.grid_cells));
        }
        if self.degree > 400 {
            return bad(format!("degree {} is beyond the supported range (<= 400)", self.degree));
        }
        for (name, v) in [("d1", self.d1), ("d2", self.d2), ("r0", self.r0), ("n_total", self.n_total)] {
            if !(v > 0.0) {
                return bad(format!("{name} must be > 0, got {v}"));
            }
        }
        if !(self.k_r >= 0.0) {
            return bad(format!("k_r must be >= 0, got {}", self.k_r));
        }
        if self.quad_order < 2 {
            return bad(format!("quad_order must be >= 2, got {}", self.quad_order));
        }
        if self.output_stride < 1 {
            return bad("output_stride must be >= 1".into());
        }
        if self.model == ModelName::FullTemplate {
            for (rho, p, q) in [
                (0.0, self.p0_center, self.q0_center),
                (1.0, self.p0_edge, self.q0_edge),
            ] {
                if p < 0.0 || q < 0.0 || p + q > self.n_total {
                    return bad(format!(
                        "initial densities at rho = {rho} must satisfy p, q >= 0 and p + q <= n_total"
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let cfg = SolverConfig::parse("alpha = 0.3\n# comment\nsteps=50 # trailing\n\ndegree = 8\n").unwrap();
        assert_eq!(cfg.alpha, 0.3);
        assert_eq!(cfg.steps, 50);
        assert_eq!(cfg.degree, 8);
        assert_eq!(cfg.model, ModelName::Example1);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = SolverConfig::parse("alpah = 0.3\n").unwrap_err();
        assert!(matches!(err, FbpError::UnknownKey(ref k) if k == "alpah"));
    }

    #[test]
    fn malformed_values() {
        assert!(SolverConfig::parse("steps = ten\n").is_err());
        assert!(SolverConfig::parse("just words\n").is_err());
        assert!(SolverConfig::parse("model = mystery\n").is_err());
    }

    #[test]
    fn template_defaults_follow_model_key() {
        let cfg = SolverConfig::parse("steps = 10\nmodel = full-template\n").unwrap();
        assert_eq!(cfg.model, ModelName::FullTemplate);
        assert_eq!(cfg.c_bar, 1.0);
    }

    #[test]
    fn text_round_trip_and_hash() {
        let mut cfg = SolverConfig::full_template();
        cfg.d1 = 1.0 / 7.0;
        cfg.strict_aprime_n_zero = true;
        let back = SolverConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        let mut other = cfg.clone();
        other.output_dir = Some("elsewhere".into());
        other.output_stride = 7;
        assert_eq!(other.hash(), cfg.hash());
        other.alpha = 0.2;
        assert_ne!(other.hash(), cfg.hash());
        assert_eq!(cfg.hash().len(), 16);
    }

    #[test]
    fn validation() {
        let mut cfg = SolverConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.steps = 0;
        assert!(cfg.validate().is_err());
        let cfg = SolverConfig {
            alpha: 1.0,
            ..SolverConfig::default()
        };
        assert!(cfg.validate().is_err());
        let mut cfg = SolverConfig::full_template();
        cfg.p0_center = 0.9;
        cfg.q0_center = 0.5;
        assert!(cfg.validate().is_err());
    }
}
