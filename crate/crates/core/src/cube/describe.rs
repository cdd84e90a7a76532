use std::fmt;
use std::str::FromStr;

use super::{CubePoint, MembershipOracle, MonotoneSet, MAX_DENSE_DIM};
use crate::error::{Error, Result};

/// One-line text description of a monotone set.
///
/// ```text
/// threshold n k        {x : |x| >= k}
/// dictator n i         {x : x_i = 1}, i in 1..=n
/// tribes n w           OR of ANDs over blocks of w coordinates
/// upset n p1,p2,...    upward closure of binary points (last coordinate first)
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetDescription {
    Threshold { n: usize, k: usize },
    Dictator { n: usize, coord: usize },
    Tribes { n: usize, width: usize },
    Upset { n: usize, generators: Vec<CubePoint> },
}

impl SetDescription {
    pub fn dim(&self) -> usize {
        match self {
            Self::Threshold { n, .. }
            | Self::Dictator { n, .. }
            | Self::Tribes { n, .. }
            | Self::Upset { n, .. } => *n,
        }
    }

    pub fn build(&self) -> Result<MonotoneSet> {
        match self {
            Self::Upset { n, generators } => MonotoneSet::upward_closure(*n, generators),
            _ => self.oracle()?.to_dense(),
        }
    }

    /// Oracle form, available at any dimension for the named families.
    pub fn oracle(&self) -> Result<MembershipOracle> {
        match self {
            Self::Threshold { n, k } => MembershipOracle::threshold(*n, *k),
            Self::Dictator { n, coord } => MembershipOracle::dictator(*n, coord - 1),
            Self::Tribes { n, width } => MembershipOracle::tribes(*n, *width),
            Self::Upset { n, generators } => {
                if *n > MAX_DENSE_DIM {
                    let gens: Vec<u64> = generators.iter().map(|g| g.index()).collect();
                    Ok(MembershipOracle::custom(*n, move |x| gens.iter().any(|g| g & !x == 0)))
                } else {
                    Ok(self.build()?.to_oracle())
                }
            }
        }
    }
}

fn parse_usize(tok: Option<&str>, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| Error::Parse(format!("missing {what}")))?;
    tok.parse().map_err(|_| Error::Parse(format!("invalid {what} {tok:?}")))
}

impl FromStr for SetDescription {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut toks = s.split_whitespace();
        let kind = toks.next().ok_or_else(|| Error::Parse("empty set description".into()))?;
        let n = parse_usize(toks.next(), "dimension")?;
        let desc = match kind {
            "threshold" => Self::Threshold { n, k: parse_usize(toks.next(), "threshold k")? },
            "dictator" => {
                let coord = parse_usize(toks.next(), "coordinate")?;
                if coord == 0 || coord > n {
                    return Err(Error::Parse(format!("coordinate {coord} not in 1..={n}")));
                }
                Self::Dictator { n, coord }
            }
            "tribes" => Self::Tribes { n, width: parse_usize(toks.next(), "tribe width")? },
            "upset" => {
                let list = toks.next().ok_or_else(|| Error::Parse("missing generator list".into()))?;
                let generators = list
                    .split(',')
                    .map(|p| {
                        let pt = CubePoint::from_binary(p)?;
                        if pt.dim() != n {
                            return Err(Error::Parse(format!("point {p:?} does not have {n} coordinates")));
                        }
                        Ok(pt)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::Upset { n, generators }
            }
            other => return Err(Error::Parse(format!("unknown set family {other:?}"))),
        };
        if let Some(extra) = toks.next() {
            return Err(Error::Parse(format!("unexpected token {extra:?}")));
        }
        Ok(desc)
    }
}

impl fmt::Display for SetDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Threshold { n, k } => write!(f, "threshold {n} {k}"),
            Self::Dictator { n, coord } => write!(f, "dictator {n} {coord}"),
            Self::Tribes { n, width } => write!(f, "tribes {n} {width}"),
            Self::Upset { n, generators } => {
                write!(f, "upset {n} ")?;
                for (i, g) in generators.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{g}")?;
                }
                Ok(())
            }
        }
    }
}
