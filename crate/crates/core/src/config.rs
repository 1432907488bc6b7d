//! Run configuration: a flat `key = value` file, overridable by flags.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fgl::Caps;
use crate::modular::is_prime;

/// Overrides the default working precision when set.
pub const PRECISION_ENV: &str = "LUBIN_TATE_PRECISION";

pub const DEFAULT_PRECISION: u32 = 12;

/// Largest residue field size and x-degree cap accepted by the resource guard.
const MAX_FIELD: u64 = 1 << 12;
const MAX_DX: u32 = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Fgl,
    Convergence,
    Equivariance,
    Etale,
    FixedPoint,
    Derivation,
    Canonical,
    Isogeny,
    Chromatic,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Fgl,
        Suite::Convergence,
        Suite::Equivariance,
        Suite::Etale,
        Suite::FixedPoint,
        Suite::Derivation,
        Suite::Canonical,
        Suite::Isogeny,
        Suite::Chromatic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Fgl => "fgl",
            Suite::Convergence => "convergence",
            Suite::Equivariance => "equivariance",
            Suite::Etale => "etale",
            Suite::FixedPoint => "fixed_point",
            Suite::Derivation => "derivation",
            Suite::Canonical => "canonical",
            Suite::Isogeny => "isogeny",
            Suite::Chromatic => "chromatic",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub p: u64,
    pub n: usize,
    /// Working precision N: elements of W are kept modulo p^N.
    pub precision: u32,
    pub du: u32,
    pub dx: u32,
    pub dxy: u32,
    /// Step limit for the ratio limits.
    pub m_max: usize,
    pub samples: usize,
    pub seed: u64,
    /// Digits demanded of period points.
    pub digits: u32,
    /// Number of levels of the suspension group.
    pub levels: u32,
    /// M for dualizing degrees.
    pub m: u32,
    pub suites: Vec<Suite>,
    /// Fault injection: perturb ℓ_k before checking integrality.
    pub corrupt_log: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::new(3, 2)
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value '{value}' for {key}")))
}

impl RunConfig {
    /// Defaults for (p, n), with caps from [`Caps::default_for`].
    pub fn new(p: u64, n: usize) -> Self {
        let caps = Caps::default_for(p, n);
        let precision = std::env::var(PRECISION_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_PRECISION);
        RunConfig {
            p,
            n,
            precision,
            du: caps.du,
            dx: caps.dx,
            dxy: caps.dxy,
            m_max: 40,
            samples: 10,
            seed: 0,
            digits: 8,
            levels: crate::chromatic::DEFAULT_LEVELS,
            m: 1,
            suites: Suite::ALL.to_vec(),
            corrupt_log: None,
        }
    }

    pub fn caps(&self) -> Caps {
        Caps {
            du: self.du,
            dx: self.dx,
            dxy: self.dxy,
        }
    }

    /// Resets the caps to the defaults for the current (p, n).
    pub fn default_caps(&mut self) {
        let c = Caps::default_for(self.p, self.n);
        self.du = c.du;
        self.dx = c.dx;
        self.dxy = c.dxy;
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "p" => self.p = parse(key, value)?,
            "n" => self.n = parse(key, value)?,
            "precision" | "N" => self.precision = parse(key, value)?,
            "du" => self.du = parse(key, value)?,
            "dx" => self.dx = parse(key, value)?,
            "dxy" => self.dxy = parse(key, value)?,
            "m_max" => self.m_max = parse(key, value)?,
            "samples" => self.samples = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "digits" => self.digits = parse(key, value)?,
            "levels" => self.levels = parse(key, value)?,
            "M" | "m" => self.m = parse(key, value)?,
            "suites" => {
                self.suites = value
                    .split(',')
                    .map(|s| s.trim())
                    .filter(|s| !s.is_empty())
                    .map(Suite::from_str)
                    .collect::<Result<_>>()?
            }
            "corrupt_log" => {
                self.corrupt_log = match value.trim() {
                    "" | "none" => None,
                    v => Some(parse(key, v)?),
                }
            }
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are skipped. Caps not given in the text follow p
    /// and n.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut caps_given = false;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let k = k.trim();
            if matches!(k, "p" | "n") && !caps_given {
                self.set(k, v)?;
                self.default_caps();
                continue;
            }
            caps_given |= matches!(k, "du" | "dx" | "dxy");
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p) {
            return Err(Error::Config(format!("p = {} is not prime", self.p)));
        }
        let positive = [
            ("n", self.n as u64),
            ("precision", self.precision as u64),
            ("du", self.du as u64),
            ("dx", self.dx as u64),
            ("dxy", self.dxy as u64),
            ("m_max", self.m_max as u64),
            ("samples", self.samples as u64),
            ("digits", self.digits as u64),
            ("levels", self.levels as u64),
        ];
        for (k, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{k} must be positive")));
            }
        }
        if self.n > crate::padic::MAX_DEGREE {
            return Err(Error::Config(format!("n = {} exceeds {}", self.n, crate::padic::MAX_DEGREE)));
        }
        let q = (self.p as u128).checked_pow(self.n as u32).unwrap_or(u128::MAX);
        if q > MAX_FIELD as u128 || self.dx > MAX_DX {
            return Err(Error::Config(format!(
                "unsupported size: p^n = {q}, dx = {} (limits {MAX_FIELD}, {MAX_DX})",
                self.dx
            )));
        }
        if self.precision > crate::padic::max_precision(self.p) {
            return Err(Error::Config(format!(
                "precision {} exceeds {} for p = {}",
                self.precision,
                crate::padic::max_precision(self.p),
                self.p
            )));
        }
        Ok(())
    }

    /// The flat text form, readable by [`RunConfig::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let suites: Vec<&str> = self.suites.iter().map(|x| x.name()).collect();
        let _ = writeln!(s, "p = {}", self.p);
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "precision = {}", self.precision);
        let _ = writeln!(s, "du = {}", self.du);
        let _ = writeln!(s, "dx = {}", self.dx);
        let _ = writeln!(s, "dxy = {}", self.dxy);
        let _ = writeln!(s, "m_max = {}", self.m_max);
        let _ = writeln!(s, "samples = {}", self.samples);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "digits = {}", self.digits);
        let _ = writeln!(s, "levels = {}", self.levels);
        let _ = writeln!(s, "M = {}", self.m);
        let _ = writeln!(s, "suites = {}", suites.join(","));
        if let Some(k) = self.corrupt_log {
            let _ = writeln!(s, "corrupt_log = {k}");
        }
        s
    }
}
