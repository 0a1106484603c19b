//! Variable labels for polynomials on the target space, on the polyvector
//! side of the Legendre transformation, and on phase space.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exterior::{MultiIndex, TargetSpace};

/// An axis of the target space. Field axes order before worldsheet axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    Field(usize),
    Worldsheet(usize),
}

impl Axis {
    pub fn position(&self, space: TargetSpace) -> usize {
        match *self {
            Axis::Field(a) => space.field_axis(a),
            Axis::Worldsheet(i) => space.worldsheet_axis(i),
        }
    }

    pub fn from_position(space: TargetSpace, pos: usize) -> Self {
        if pos < space.n_fields {
            Axis::Field(pos)
        } else {
            Axis::Worldsheet(pos - space.n_fields)
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Field(a) => write!(f, "phi{a}"),
            Axis::Worldsheet(i) => write!(f, "x{i}"),
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |digits: &str| {
            digits
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad axis `{s}`")))
        };
        if let Some(d) = s.strip_prefix("phi") {
            Ok(Axis::Field(parse(d)?))
        } else if let Some(d) = s.strip_prefix('x') {
            Ok(Axis::Worldsheet(parse(d)?))
        } else {
            Err(Error::Parse(format!("bad axis `{s}`")))
        }
    }
}

/// A sorted set of axes labelling a polyvector or momentum coordinate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Vec<Axis>);

impl Label {
    pub fn new(mut axes: Vec<Axis>) -> Result<Self> {
        axes.sort();
        if axes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parse("repeated axis in label".into()));
        }
        Ok(Label(axes))
    }

    pub fn axes(&self) -> &[Axis] {
        &self.0
    }

    pub fn from_index(space: TargetSpace, index: &MultiIndex) -> Self {
        Label(
            index
                .axes()
                .iter()
                .map(|&p| Axis::from_position(space, p))
                .collect(),
        )
    }

    pub fn to_index(&self, space: TargetSpace) -> Result<MultiIndex> {
        MultiIndex::new(self.0.iter().map(|a| a.position(space)).collect())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(Axis::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Variables of phase-space polynomials: base coordinates, the coordinate
/// `Π` dual to `Λ`, and momenta `P_I`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X(usize),
    Phi(usize),
    P(Label),
    Pi,
}

impl Var {
    pub fn p(space: TargetSpace, index: &MultiIndex) -> Self {
        Var::P(Label::from_index(space, index))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{i}"),
            Var::Phi(a) => write!(f, "phi{a}"),
            Var::P(l) => write!(f, "P{l}"),
            Var::Pi => write!(f, "Pi"),
        }
    }
}

impl FromStr for Var {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "Pi" {
            return Ok(Var::Pi);
        }
        if let Some(inner) = s.strip_prefix("P[").and_then(|r| r.strip_suffix(']')) {
            let axes = if inner.is_empty() {
                Vec::new()
            } else {
                inner
                    .split(',')
                    .map(|t| t.trim().parse())
                    .collect::<Result<Vec<Axis>>>()?
            };
            return Ok(Var::P(Label::new(axes)?));
        }
        match s.parse::<Axis>()? {
            Axis::Field(a) => Ok(Var::Phi(a)),
            Axis::Worldsheet(i) => Ok(Var::X(i)),
        }
    }
}

/// Variables on the polyvector side: `Λ` and the coordinates `X^I`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GraphVar {
    Lambda,
    X(Label),
}

impl GraphVar {
    pub fn x(space: TargetSpace, index: &MultiIndex) -> Self {
        GraphVar::X(Label::from_index(space, index))
    }

    /// The dual phase-space coordinate.
    pub fn dual(&self) -> Var {
        match self {
            GraphVar::Lambda => Var::Pi,
            GraphVar::X(l) => Var::P(l.clone()),
        }
    }
}

impl fmt::Display for GraphVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphVar::Lambda => write!(f, "Lambda"),
            GraphVar::X(l) => write!(f, "X{l}"),
        }
    }
}
