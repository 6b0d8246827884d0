//! Run configuration: flags over an optional JSON config file over defaults.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use tropint::numverify::DEFAULT_EPS;
use tropint::plpoly::QPoint;
use tropint::puiseux::{parse_q, Q};

#[derive(Parser, Debug)]
#[command(name = "tropint", version, about = "Tropical degenerations of plane curves and their period matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Tropicalize and summarize the curve
    Trop(Flags),
    /// Tropical period matrix B_T
    Periods(Flags),
    /// Good-tropicalization conditions
    Check(Flags),
    /// Numerical check of (−2πiε)·B′_ε → B_T
    Verify(Flags),
    /// Lift truncation roots to Puiseux series
    Lift(Flags),
}

impl Command {
    pub fn flags(&self) -> &Flags {
        match self {
            Command::Trop(f) | Command::Periods(f) | Command::Check(f) | Command::Verify(f) | Command::Lift(f) => f,
        }
    }
}

#[derive(Args, Debug, Clone, PartialEq, Eq, Default)]
pub struct Flags {
    #[arg(long, value_name = "FILE")]
    pub input: Option<String>,
    #[arg(long, value_name = "STR")]
    pub poly: Option<String>,
    #[arg(long, value_name = "LIST")]
    pub eps: Option<String>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<String>,
    #[arg(long, value_name = "P/Q")]
    pub order: Option<String>,
    /// Lift at this point `X,Y` instead of at every vertex
    #[arg(long, value_name = "X,Y")]
    pub at: Option<String>,
    #[arg(long, value_name = "T")]
    pub threshold: Option<String>,
    #[arg(long, value_name = "FILE")]
    pub config: Option<String>,
    #[arg(long)]
    pub svg: bool,
    #[arg(long)]
    pub strict_genericness: bool,
    #[arg(long)]
    pub lemma44: bool,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    input: Option<PathBuf>,
    poly: Option<String>,
    eps: Option<Vec<f64>>,
    out: Option<PathBuf>,
    svg: Option<bool>,
    strict_genericness: Option<bool>,
    lemma44: Option<bool>,
    order: Option<String>,
    seed: Option<u64>,
    threshold: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum Source {
    File(PathBuf),
    Inline(String),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: Source,
    pub eps: Vec<f64>,
    pub out: Option<PathBuf>,
    pub svg: bool,
    pub strict_genericness: bool,
    pub lemma44: bool,
    pub order: Q,
    pub at: Option<QPoint>,
    pub seed: u64,
    pub threshold: Option<f64>,
}

pub fn parse_eps(s: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().with_context(|| format!("bad ε value {x:?}")))
        .collect::<Result<_>>()?;
    validate_eps(&v)?;
    Ok(v)
}

fn validate_eps(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        bail!("empty ε list");
    }
    if let Some(e) = v.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        bail!("ε = {e} is not in (0, 1)");
    }
    if v.windows(2).any(|w| w[1] >= w[0]) {
        bail!("ε list must be strictly decreasing");
    }
    Ok(())
}

fn parse_rational(s: &str) -> Result<Q> {
    parse_q(s.trim()).with_context(|| format!("bad rational {s:?}"))
}

impl RunConfig {
    pub fn resolve(flags: &Flags) -> Result<Self> {
        let s = flags;
        let file: FileConfig = match &s.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {p}"))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config {p}"))?
            }
            None => FileConfig::default(),
        };
        let source = match (&s.input, &s.poly) {
            (Some(_), Some(_)) => bail!("give either --input or --poly, not both"),
            (Some(p), None) => Source::File(p.into()),
            (None, Some(t)) => Source::Inline(t.clone()),
            (None, None) => match (file.input, file.poly) {
                (Some(p), _) => Source::File(p),
                (None, Some(t)) => Source::Inline(t),
                (None, None) => bail!("no input: use --input FILE or --poly STR"),
            },
        };
        let eps = match &s.eps {
            Some(e) => parse_eps(e)?,
            None => {
                let v = file.eps.unwrap_or_else(|| DEFAULT_EPS.to_vec());
                validate_eps(&v)?;
                v
            }
        };
        let order = match s.order.clone().or(file.order) {
            Some(o) => parse_rational(&o)?,
            None => Q::from_integer(4),
        };
        let at = match &s.at {
            Some(a) => {
                let (x, y) = a.split_once(',').context("--at expects X,Y")?;
                Some(QPoint::new(parse_rational(x)?, parse_rational(y)?))
            }
            None => None,
        };
        let threshold = match &s.threshold {
            Some(t) => Some(t.parse::<f64>().with_context(|| format!("bad threshold {t:?}"))?),
            None => file.threshold,
        };
        Ok(Self {
            source,
            eps,
            out: s.out.as_ref().map(PathBuf::from).or(file.out),
            svg: flags.svg || file.svg.unwrap_or(false),
            strict_genericness: flags.strict_genericness || file.strict_genericness.unwrap_or(false),
            lemma44: flags.lemma44 || file.lemma44.unwrap_or(false),
            order,
            at,
            seed: flags.seed.or(file.seed).unwrap_or(1),
            threshold,
        })
    }

    /// Phase of the fixed coordinate when picking truncation roots.
    pub fn phase(&self) -> f64 {
        0.3 + 0.618_033_988_75 * self.seed as f64 % std::f64::consts::TAU
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_lists() {
        assert_eq!(parse_eps("0.2, 0.1,0.05").unwrap(), vec![0.2, 0.1, 0.05]);
        assert!(parse_eps("0.1,0.2").is_err());
        assert!(parse_eps("0.5,1.0").is_err());
        assert!(parse_eps("x").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("tropint-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("c.json");
        std::fs::write(&p, r#"{"poly": "x+y+1", "eps": [0.3, 0.2], "seed": 5}"#).unwrap();
        let mut f = Flags::default();
        f.config = Some(p.to_string_lossy().into_owned());
        f.eps = Some("0.1".into());
        let c = RunConfig::resolve(&f).unwrap();
        assert!(matches!(c.source, Source::Inline(ref s) if s == "x+y+1"));
        assert_eq!(c.eps, vec![0.1]);
        assert_eq!(c.seed, 5);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
