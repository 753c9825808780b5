//! Flat `key = value` experiment configuration.
//!
//! Lines starting with `#` are comments. Lists are comma separated; numbers
//! accept fractions such as `2/3`. See the README for the key reference.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::assembly::BcKind;
use crate::stabilization::StabMode;
use crate::trimming::TrimRegion;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Solve,
    Stability,
    Convergence,
    Conditioning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    H,
    Eps,
    Angle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySpec {
    pub name: String,
    pub offset: [f64; 2],
    pub scale: [f64; 2],
}

/// Penalty `value`, multiplied by `p + 1` when `per_degree` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beta {
    pub value: f64,
    pub per_degree: bool,
}

impl Beta {
    pub fn for_degree(&self, p: usize) -> f64 {
        if self.per_degree {
            self.value * (p + 1) as f64
        } else {
            self.value
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub study: String,
    pub sweep: Sweep,
    pub geometry: GeometrySpec,
    pub region: TrimRegion,
    /// Rotation angles `i π / angle_div` for `i < angle_steps` (angle sweeps).
    pub angle_steps: usize,
    pub angle_div: f64,
    pub degree: usize,
    /// Mesh levels `k` with `h = 2^{-k}`.
    pub levels: Vec<u32>,
    pub eps_list: Vec<f64>,
    pub theta: Vec<f64>,
    pub beta: Beta,
    pub stab_modes: Vec<StabMode>,
    pub solution: String,
    pub quad_order: Option<usize>,
    pub sides: BcKind,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn quad_order(&self) -> usize {
        self.quad_order.unwrap_or(self.degree + 2)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let k = k.trim().to_string();
            if kv.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key '{k}'",
                    lineno + 1
                )));
            }
        }
        let mut r = Reader { kv };
        let cfg = r.build()?;
        if let Some(k) = r.kv.keys().next() {
            return Err(Error::Config(format!("unknown key '{k}'")));
        }
        Ok(cfg)
    }
}

pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Config(format!("invalid number '{s}'"));
    let v = if let Some((a, b)) = s.split_once('/') {
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        a / b
    } else {
        s.parse().map_err(|_| bad())?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_number).collect()
}

struct Reader {
    kv: BTreeMap<String, String>,
}

impl Reader {
    fn take(&mut self, k: &str) -> Option<String> {
        self.kv.remove(k)
    }

    fn req(&mut self, k: &str) -> Result<String> {
        self.take(k)
            .ok_or_else(|| Error::Config(format!("missing key '{k}'")))
    }

    fn num(&mut self, k: &str, default: f64) -> Result<f64> {
        self.take(k)
            .map(|v| parse_number(&v))
            .unwrap_or(Ok(default))
    }

    fn pair(&mut self, k: &str, default: [f64; 2]) -> Result<[f64; 2]> {
        match self.take(k) {
            None => Ok(default),
            Some(v) => {
                let l = parse_list(&v)?;
                if l.len() != 2 {
                    return Err(Error::Config(format!("'{k}' needs two values")));
                }
                Ok([l[0], l[1]])
            }
        }
    }

    fn build(&mut self) -> Result<ExperimentConfig> {
        let experiment = match self.req("experiment")?.as_str() {
            "solve" => ExperimentKind::Solve,
            "stability" => ExperimentKind::Stability,
            "convergence" => ExperimentKind::Convergence,
            "conditioning" => ExperimentKind::Conditioning,
            other => return Err(Error::Config(format!("unknown experiment '{other}'"))),
        };
        let sweep = match self.take("sweep").as_deref() {
            None | Some("h") => Sweep::H,
            Some("eps") => Sweep::Eps,
            Some("angle") => Sweep::Angle,
            Some(other) => return Err(Error::Config(format!("unknown sweep '{other}'"))),
        };
        let study = self.take("study").unwrap_or_else(|| "default".into());
        let gname = self.req("geometry")?;
        if ![
            "identity",
            "affine",
            "quarter_annulus",
            "c0_quarter_annulus",
        ]
        .contains(&gname.as_str())
        {
            return Err(Error::Config(format!("unknown geometry '{gname}'")));
        }
        let geometry = GeometrySpec {
            offset: self.pair("geometry.offset", [-2.0, -1.0])?,
            scale: self.pair("geometry.scale", [3.0, 3.0])?,
            name: gname,
        };
        let region = self.region()?;
        let angle_steps = self.num("region.angle_steps", 101.0)? as usize;
        let angle_div = self.num("region.angle_div", 200.0)?;
        let degree = self.num("degree", 2.0)?;
        if !((1.0..=6.0).contains(&degree) && degree.fract() == 0.0) {
            return Err(Error::Config(format!(
                "degree {degree} must be an integer in 1..=6"
            )));
        }
        let degree = degree as usize;
        let levels = parse_list(&self.req("levels")?)?
            .into_iter()
            .map(|v| {
                if (0.0..=10.0).contains(&v) && v.fract() == 0.0 {
                    Ok(v as u32)
                } else {
                    Err(Error::Config(format!(
                        "level {v} must be an integer in 0..=10"
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if levels.is_empty() {
            return Err(Error::Config("levels must be nonempty".into()));
        }
        let eps_list = match self.take("eps_list") {
            Some(v) => parse_list(&v)?,
            None => Vec::new(),
        };
        if eps_list.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::Config("eps values must be positive".into()));
        }
        let theta = match self.take("theta") {
            Some(v) => parse_list(&v)?,
            None => vec![1.0],
        };
        if theta.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::Config("theta must lie in [0, 1]".into()));
        }
        let beta = match self.take("beta") {
            None => Beta {
                value: 1.0,
                per_degree: false,
            },
            Some(v) => {
                let compact: String = v.chars().filter(|c| !c.is_whitespace()).collect();
                if let Some(s) = compact.strip_suffix("*(p+1)") {
                    Beta {
                        value: parse_number(s)?,
                        per_degree: true,
                    }
                } else {
                    Beta {
                        value: parse_number(&compact)?,
                        per_degree: false,
                    }
                }
            }
        };
        if !(beta.value > 0.0) {
            return Err(Error::Config("beta must be positive".into()));
        }
        let stab_modes = self
            .take("stab_mode")
            .unwrap_or_else(|| "parametric".into())
            .split(',')
            .map(|s| s.trim().parse::<StabMode>())
            .collect::<Result<Vec<_>>>()?;
        let solution = self.take("solution").unwrap_or_else(|| "zero".into());
        if !super::solutions::SOLUTION_NAMES.contains(&solution.as_str()) {
            return Err(Error::Config(format!("unknown solution '{solution}'")));
        }
        let quad_order = match self.take("quad_order").as_deref() {
            None | Some("auto") => None,
            Some(v) => {
                let n = parse_number(v)?;
                if !(n >= 1.0 && n.fract() == 0.0) {
                    return Err(Error::Config(format!(
                        "quad_order {v} must be a positive integer"
                    )));
                }
                Some(n as usize)
            }
        };
        let sides = match self.take("sides").as_deref() {
            None | Some("strong") => BcKind::StrongDirichlet,
            Some("weak") => BcKind::WeakDirichlet,
            Some("neumann") => BcKind::Neumann,
            Some(other) => return Err(Error::Config(format!("unknown side condition '{other}'"))),
        };
        let out = self.take("out").map(PathBuf::from);
        Ok(ExperimentConfig {
            experiment,
            study,
            sweep,
            geometry,
            region,
            angle_steps,
            angle_div,
            degree,
            levels,
            eps_list,
            theta,
            beta,
            stab_modes,
            solution,
            quad_order,
            sides,
            out,
        })
    }

    fn region(&mut self) -> Result<TrimRegion> {
        let kind = self.req("region.kind")?;
        Ok(match kind.as_str() {
            "half_plane" => TrimRegion::HalfPlaneParam {
                axis: self.num("region.axis", 1.0)? as usize,
                threshold: parse_number(&self.req("region.threshold")?)?,
                keep_below: match self.take("region.keep").as_deref() {
                    None | Some("below") => true,
                    Some("above") => false,
                    Some(o) => {
                        return Err(Error::Config(format!(
                            "region.keep must be below|above, got '{o}'"
                        )))
                    }
                },
            },
            "disk" => TrimRegion::DiskParam {
                center: self.pair("region.center", [0.0, 0.0])?,
                radius: parse_number(&self.req("region.radius")?)?,
                keep_outside: match self.take("region.keep").as_deref() {
                    None | Some("outside") => true,
                    Some("inside") => false,
                    Some(o) => {
                        return Err(Error::Config(format!(
                            "region.keep must be outside|inside, got '{o}'"
                        )))
                    }
                },
            },
            "rect_remove" => TrimRegion::RectRemoveParam {
                lo: self.pair("region.lo", [0.0, 0.0])?,
                hi: self.pair("region.hi", [1.0, 1.0])?,
            },
            "rotated_rect" => TrimRegion::RotatedRectKeepPhysical {
                center: self.pair("region.center", [0.485, 0.5])?,
                half: self.pair("region.half", [0.295, 0.28])?,
                angle: self.num("region.angle", 0.0)?,
            },
            other => return Err(Error::Config(format!("unknown region kind '{other}'"))),
        })
    }
}
