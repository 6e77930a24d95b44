//! `key = value` run configuration.
//!
//! ```text
//! # unit impact data, acute corner
//! alpha = 2
//! theta_bar = 1.0471975511965976
//! s0 = -1
//! dr0 = 1
//! ds0 = 1
//! k = 100
//! ```
//!
//! Blank lines and `#` comments are ignored. Unknown and repeated keys are
//! errors, and every value is checked against the constraints of the type
//! it feeds.

use std::path::PathBuf;

use crate::asymptotics::{check_gamma1, check_zeta};
use crate::corner::{default_zeta, EpsPolicy};
use crate::error::{Error, Result};
use crate::geometry::ConeGeometry;
use crate::linear_phase::{first_crossing_time, DampingParams, InitialData};

/// How the corner scale is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// From a stiffness `k`; the whole trajectory can be rebuilt.
    Physical { k: f64 },
    /// From `η` directly; only the scaled corner problem is available.
    Scaled { eta: f64, eps: EpsPolicy },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub alpha: f64,
    pub theta_bar: f64,
    pub init: InitialData,
    pub mode: Option<Mode>,
    pub gamma1: f64,
    /// `None` means `0.5/|ξ1|`.
    pub zeta: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
    /// Physical end time; `None` means `2 t0`.
    pub horizon: Option<f64>,
    /// Scaled corner window; `None` means the default from the corner module.
    pub corner_horizon: Option<f64>,
    pub safety: f64,
    pub k_list: Vec<f64>,
    pub eta_list: Vec<f64>,
    pub grid_n: usize,
    pub r_range: (f64, f64),
    pub dr_range: (f64, f64),
    pub output: Option<PathBuf>,
}

impl SimConfig {
    /// Defaults for everything but the damping ratio and the corner angle.
    pub fn new(alpha: f64, theta_bar: f64) -> Result<Self> {
        let cfg = Self {
            alpha,
            theta_bar,
            init: InitialData::new(-1.0, 1.0, 1.0)?,
            mode: None,
            gamma1: 1.2,
            zeta: None,
            rtol: 1e-10,
            atol: 1e-12,
            horizon: None,
            corner_horizon: None,
            safety: 1.0,
            k_list: vec![1e2, 1e3, 1e4],
            eta_list: vec![1e-2, 1e-3, 1e-4],
            grid_n: 21,
            r_range: (0.1, 3.0),
            dr_range: (-2.0, 2.0),
            output: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn damping(&self) -> Result<DampingParams> {
        DampingParams::new(self.alpha)
    }

    pub fn cone(&self) -> Result<ConeGeometry> {
        ConeGeometry::new(self.theta_bar)
    }

    pub fn t0(&self) -> Result<f64> {
        first_crossing_time(&self.init)
    }

    pub fn horizon_time(&self) -> Result<f64> {
        Ok(self.horizon.unwrap_or(2.0 * self.t0()?))
    }

    pub fn zeta_value(&self) -> Result<f64> {
        Ok(self.zeta.unwrap_or(default_zeta(&self.damping()?)))
    }

    /// Cross-field checks; run after every change.
    pub fn validate(&self) -> Result<()> {
        let damping = self.damping()?;
        self.cone()?;
        check_gamma1(self.gamma1)?;
        if let Some(z) = self.zeta {
            check_zeta(z, &damping)?;
        }
        positive("rtol", self.rtol)?;
        positive("atol", self.atol)?;
        positive("safety", self.safety)?;
        if let Some(h) = self.horizon {
            positive("horizon", h)?;
        }
        if let Some(h) = self.corner_horizon {
            if !(h >= 0.0 && h.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "corner_horizon must be non-negative (got {h})"
                )));
            }
        }
        match self.mode {
            Some(Mode::Physical { k }) => positive("k", k)?,
            Some(Mode::Scaled { eta, eps }) => {
                check_eta(eta)?;
                if let EpsPolicy::Value(e) = eps {
                    if !(0.0..1.0).contains(&e) {
                        return Err(Error::InvalidInput(format!(
                            "eps must lie in [0, 1) (got {e})"
                        )));
                    }
                }
            }
            None => {}
        }
        for &k in &self.k_list {
            positive("k_list entries", k)?;
        }
        if self.k_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "k_list must be strictly increasing".into(),
            ));
        }
        for &e in &self.eta_list {
            check_eta(e)?;
        }
        if !(self.r_range.0 > 0.0 && self.r_range.1 >= self.r_range.0 && self.r_range.1.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "r_range must satisfy 0 < r_min <= r_max (got {:?})",
                self.r_range
            )));
        }
        if !(self.dr_range.1 >= self.dr_range.0
            && self.dr_range.0.is_finite()
            && self.dr_range.1.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "dr_range must satisfy dr_min <= dr_max (got {:?})",
                self.dr_range
            )));
        }
        Ok(())
    }

    /// Apply command-line overrides and re-check.
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(k) = o.k {
            self.mode = Some(Mode::Physical { k });
        }
        if let Some(eta) = o.eta {
            let eps = match self.mode {
                Some(Mode::Scaled { eps, .. }) => eps,
                _ => EpsPolicy::Derive,
            };
            self.mode = Some(Mode::Scaled { eta, eps });
        }
        if let Some(t) = o.theta_bar {
            self.theta_bar = t;
        }
        if let Some(p) = &o.out {
            self.output = Some(p.clone());
        }
        self.validate()
    }
}

/// Command-line overrides of config values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub k: Option<f64>,
    pub eta: Option<f64>,
    pub theta_bar: Option<f64>,
    pub out: Option<PathBuf>,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be positive (got {x})"
        )))
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidScale(eta))
    }
}

const KEYS: &[&str] = &[
    "alpha",
    "theta_bar",
    "s0",
    "dr0",
    "ds0",
    "mode",
    "k",
    "eta",
    "eps",
    "gamma1",
    "zeta",
    "rtol",
    "atol",
    "horizon",
    "corner_horizon",
    "safety",
    "k_list",
    "eta_list",
    "grid_n",
    "r_min",
    "r_max",
    "dr_min",
    "dr_max",
    "output",
];

/// Parse a configuration file.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut entries: Vec<(&str, &str, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected `key = value`, found `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::Parse {
                line,
                msg: format!("unknown key `{key}`"),
            });
        }
        if value.is_empty() {
            return Err(Error::Parse {
                line,
                msg: format!("missing value for `{key}`"),
            });
        }
        if let Some(&(_, _, first)) = entries.iter().find(|e| e.0 == key) {
            return Err(Error::Parse {
                line,
                msg: format!("`{key}` already set on line {first}"),
            });
        }
        entries.push((key, value, line));
    }
    let get = |key: &str| entries.iter().find(|e| e.0 == key).map(|e| (e.1, e.2));
    let num = |key: &str| -> Result<Option<f64>> {
        get(key)
            .map(|(v, line)| {
                v.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("`{key}` expects a number, found `{v}`"),
                })
            })
            .transpose()
    };
    let at_line = |key: &str, e: Error| match get(key) {
        Some((_, line)) => Error::Parse {
            line,
            msg: e.to_string(),
        },
        None => e,
    };
    let required = |key: &str| -> Result<f64> {
        num(key)?.ok_or_else(|| Error::InvalidInput(format!("missing required key `{key}`")))
    };

    let alpha = required("alpha")?;
    DampingParams::new(alpha).map_err(|e| at_line("alpha", e))?;
    let theta_bar = required("theta_bar")?;
    ConeGeometry::new(theta_bar).map_err(|e| at_line("theta_bar", e))?;
    let mut cfg = SimConfig::new(alpha, theta_bar)?;

    let s0 = num("s0")?.unwrap_or(cfg.init.s0);
    let dr0 = num("dr0")?.unwrap_or(cfg.init.dr0);
    let ds0 = num("ds0")?.unwrap_or(cfg.init.ds0);
    cfg.init = InitialData::new(s0, dr0, ds0)?;

    if let Some(g) = num("gamma1")? {
        check_gamma1(g).map_err(|e| at_line("gamma1", e))?;
        cfg.gamma1 = g;
    }
    cfg.zeta = num("zeta")?;
    if let Some(x) = num("rtol")? {
        cfg.rtol = x;
    }
    if let Some(x) = num("atol")? {
        cfg.atol = x;
    }
    cfg.horizon = num("horizon")?;
    cfg.corner_horizon = num("corner_horizon")?;
    if let Some(x) = num("safety")? {
        cfg.safety = x;
    }
    if let Some((v, line)) = get("k_list") {
        cfg.k_list = parse_list(v, line, "k_list")?;
    }
    if let Some((v, line)) = get("eta_list") {
        cfg.eta_list = parse_list(v, line, "eta_list")?;
    }
    if let Some((v, line)) = get("grid_n") {
        cfg.grid_n = v.parse::<usize>().map_err(|_| Error::Parse {
            line,
            msg: format!("`grid_n` expects a non-negative integer, found `{v}`"),
        })?;
    }
    cfg.r_range = (
        num("r_min")?.unwrap_or(cfg.r_range.0),
        num("r_max")?.unwrap_or(cfg.r_range.1),
    );
    cfg.dr_range = (
        num("dr_min")?.unwrap_or(cfg.dr_range.0),
        num("dr_max")?.unwrap_or(cfg.dr_range.1),
    );
    if let Some((v, _)) = get("output") {
        cfg.output = Some(PathBuf::from(v));
    }

    let k = num("k")?;
    let eta = num("eta")?;
    let eps = match get("eps") {
        None => EpsPolicy::Derive,
        Some(("derive", _)) => EpsPolicy::Derive,
        Some((v, line)) => EpsPolicy::Value(v.parse::<f64>().map_err(|_| Error::Parse {
            line,
            msg: format!("`eps` expects `derive` or a number, found `{v}`"),
        })?),
    };
    cfg.mode = match get("mode") {
        Some(("physical", line)) => Some(Mode::Physical {
            k: k.ok_or_else(|| Error::Parse {
                line,
                msg: "physical mode needs `k`".into(),
            })?,
        }),
        Some(("scaled", line)) => Some(Mode::Scaled {
            eta: eta.ok_or_else(|| Error::Parse {
                line,
                msg: "scaled mode needs `eta`".into(),
            })?,
            eps,
        }),
        Some((other, line)) => {
            return Err(Error::Parse {
                line,
                msg: format!("`mode` must be `physical` or `scaled`, found `{other}`"),
            })
        }
        None => match (k, eta) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidInput(
                    "both `k` and `eta` given; set `mode` to choose".into(),
                ))
            }
            (Some(k), None) => Some(Mode::Physical { k }),
            (None, Some(eta)) => Some(Mode::Scaled { eta, eps }),
            (None, None) => None,
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn parse_list(v: &str, line: usize, key: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| Error::Parse {
                line,
                msg: format!(
                    "`{key}` expects comma-separated numbers, found `{}`",
                    s.trim()
                ),
            })
        })
        .collect()
}
