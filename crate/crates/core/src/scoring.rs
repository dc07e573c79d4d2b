//! Scalar proposal scores and top-K selection.

use std::fmt;
use std::str::FromStr;

use crate::datamodel::Proposal;
use crate::error::{Error, Result};

/// Single-source proposal scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseScore {
    /// Highest known-class confidence.
    Score,
    /// Region-proposal objectness.
    Objectness,
    /// `1 - sum(known class scores)`: how unlike any known class the proposal is.
    Bg,
    /// `sum(known class scores)`.
    OneMinusBg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoringMethod {
    Base(BaseScore),
    ArithMean(BaseScore, BaseScore),
    GeomMean(BaseScore, BaseScore),
}

impl Default for ScoringMethod {
    fn default() -> Self {
        ScoringMethod::ArithMean(BaseScore::Objectness, BaseScore::Bg)
    }
}

impl BaseScore {
    fn name(self) -> &'static str {
        match self {
            BaseScore::Score => "score",
            BaseScore::Objectness => "objectness",
            BaseScore::Bg => "bg",
            BaseScore::OneMinusBg => "1-bg",
        }
    }

    fn eval(self, p: &Proposal) -> Result<f64> {
        let v = match self {
            BaseScore::Score => p.scores.iter().copied().fold(0.0, f64::max),
            BaseScore::Objectness => p
                .objectness
                .ok_or_else(|| Error::config("scoring needs objectness but the proposal has none"))?,
            BaseScore::Bg => 1.0 - p.scores.iter().sum::<f64>(),
            BaseScore::OneMinusBg => p.scores.iter().sum::<f64>(),
        };
        Ok(v.clamp(0.0, 1.0))
    }
}

impl FromStr for BaseScore {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "score" => Ok(BaseScore::Score),
            "objectness" => Ok(BaseScore::Objectness),
            "bg" | "bgScore" => Ok(BaseScore::Bg),
            "1-bg" | "1-bgScore" => Ok(BaseScore::OneMinusBg),
            other => Err(Error::config(format!("unknown score {other:?}"))),
        }
    }
}

impl FromStr for ScoringMethod {
    type Err = Error;

    /// Accepts `score`, `objectness`, `bg`, `1-bg`, `amean:a+b`, `gmean:a+b`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let pair = |rest: &str| -> Result<(BaseScore, BaseScore)> {
            let (a, b) = rest
                .split_once('+')
                .ok_or_else(|| Error::config(format!("expected two operands joined by '+' in {s:?}")))?;
            Ok((a.trim().parse()?, b.trim().parse()?))
        };
        if let Some(rest) = s.strip_prefix("amean:") {
            let (a, b) = pair(rest)?;
            Ok(ScoringMethod::ArithMean(a, b))
        } else if let Some(rest) = s.strip_prefix("gmean:") {
            let (a, b) = pair(rest)?;
            Ok(ScoringMethod::GeomMean(a, b))
        } else {
            Ok(ScoringMethod::Base(s.parse()?))
        }
    }
}

impl fmt::Display for ScoringMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoringMethod::Base(b) => f.write_str(b.name()),
            ScoringMethod::ArithMean(a, b) => write!(f, "amean:{}+{}", a.name(), b.name()),
            ScoringMethod::GeomMean(a, b) => write!(f, "gmean:{}+{}", a.name(), b.name()),
        }
    }
}

/// Scores a proposal; the result is clamped to `[0, 1]`.
pub fn compute_score(p: &Proposal, method: ScoringMethod) -> Result<f64> {
    let v = match method {
        ScoringMethod::Base(b) => b.eval(p)?,
        ScoringMethod::ArithMean(a, b) => (a.eval(p)? + b.eval(p)?) / 2.0,
        ScoringMethod::GeomMean(a, b) => (a.eval(p)? * b.eval(p)?).sqrt(),
    };
    Ok(v.clamp(0.0, 1.0))
}

/// Indices of the `k` best proposals with their scores, best first.
/// Equal scores keep input order.
pub fn select_top_k<P: AsRef<Proposal>>(proposals: &[P], method: ScoringMethod, k: usize) -> Result<Vec<(usize, f64)>> {
    let mut scored = proposals
        .iter()
        .enumerate()
        .map(|(i, p)| compute_score(p.as_ref(), method).map(|s| (i, s)))
        .collect::<Result<Vec<_>>>()?;
    // sort_by is stable
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    scored.truncate(k);
    Ok(scored)
}
