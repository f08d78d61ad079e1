//! Threshold-gate access trees.
//!
//! Every internal node is an `n`-of-`m` gate. Sharing walks the tree top-down:
//! a gate with threshold `n` draws a random polynomial `q` of degree `n - 1`
//! with `q(0)` equal to the value handed down by its parent, and gives its
//! `j`-th child (1-based) the value `q(j)`. Reconstruction runs bottom-up in
//! the target group with Lagrange coefficients at zero.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::pairing::{Backend, Field, Group};

/// Attribute `i` of authority `k`, written `k:i`. Both indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttributeId {
    pub authority: u32,
    pub index: u32,
}

impl AttributeId {
    pub fn new(authority: u32, index: u32) -> Self {
        AttributeId { authority, index }
    }
}

impl fmt::Display for AttributeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.authority, self.index)
    }
}

impl FromStr for AttributeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Argument(format!("attribute `{s}` is not of the form k:i"));
        let (k, i) = s.split_once(':').ok_or_else(bad)?;
        let authority: u32 = k.trim().parse().map_err(|_| bad())?;
        let index: u32 = i.trim().parse().map_err(|_| bad())?;
        if authority == 0 || index == 0 {
            return Err(bad());
        }
        Ok(AttributeId { authority, index })
    }
}

/// Parses a comma-separated attribute list such as `1:1,1:4,2:3`.
pub fn parse_attribute_set(s: &str) -> Result<BTreeSet<AttributeId>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse())
        .collect()
}

/// Leaf shares `p_leaf(index(leaf))` keyed by attribute.
pub type ShareMap<F> = BTreeMap<AttributeId, F>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AccessNode {
    Leaf(AttributeId),
    /// Satisfied when at least `threshold` children are. Children are indexed
    /// `1..=children.len()` left to right.
    Gate {
        threshold: u32,
        children: Vec<AccessNode>,
    },
}

impl AccessNode {
    pub fn leaf(authority: u32, index: u32) -> Self {
        AccessNode::Leaf(AttributeId::new(authority, index))
    }

    /// Builds and validates a gate.
    pub fn gate(threshold: u32, children: Vec<AccessNode>) -> Result<Self> {
        let node = AccessNode::Gate {
            threshold,
            children,
        };
        node.validate()?;
        Ok(node)
    }

    /// Flat `d`-of-`n` gate over the given attributes.
    pub fn threshold_of(threshold: u32, attrs: impl IntoIterator<Item = AttributeId>) -> Result<Self> {
        Self::gate(threshold, attrs.into_iter().map(AccessNode::Leaf).collect())
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        self.validate_into(&mut seen)
    }

    fn validate_into(&self, seen: &mut BTreeSet<AttributeId>) -> Result<()> {
        match self {
            AccessNode::Leaf(a) => {
                if a.authority == 0 || a.index == 0 {
                    return Err(Error::Structure(format!("attribute {a} uses a zero index")));
                }
                if !seen.insert(*a) {
                    return Err(Error::Structure(format!("attribute {a} appears twice")));
                }
                Ok(())
            }
            AccessNode::Gate {
                threshold,
                children,
            } => {
                if children.is_empty() {
                    return Err(Error::Structure("gate without children".into()));
                }
                if *threshold == 0 || *threshold as usize > children.len() {
                    return Err(Error::Structure(format!(
                        "threshold {threshold} outside 1..={}",
                        children.len()
                    )));
                }
                children.iter().try_for_each(|c| c.validate_into(seen))
            }
        }
    }

    pub fn leaves(&self) -> Vec<AttributeId> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<AttributeId>) {
        match self {
            AccessNode::Leaf(a) => out.push(*a),
            AccessNode::Gate { children, .. } => children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            AccessNode::Leaf(_) => 0,
            AccessNode::Gate { children, .. } => 1 + children.iter().map(Self::depth).max().unwrap_or(0),
        }
    }

    pub fn satisfies(&self, attrs: &BTreeSet<AttributeId>) -> bool {
        match self {
            AccessNode::Leaf(a) => attrs.contains(a),
            AccessNode::Gate {
                threshold,
                children,
            } => children.iter().filter(|c| c.satisfies(attrs)).take(*threshold as usize).count() == *threshold as usize,
        }
    }

    /// The leaves consulted by [`reconstruct_in_target`](Self::reconstruct_in_target):
    /// at each gate, the first `threshold` satisfied children in index order.
    pub fn selected_leaves(&self, attrs: &BTreeSet<AttributeId>) -> Option<Vec<AttributeId>> {
        let mut out = Vec::new();
        self.select_into(attrs, &mut out).then_some(out)
    }

    fn select_into(&self, attrs: &BTreeSet<AttributeId>, out: &mut Vec<AttributeId>) -> bool {
        match self {
            AccessNode::Leaf(a) => {
                let ok = attrs.contains(a);
                if ok {
                    out.push(*a);
                }
                ok
            }
            AccessNode::Gate { .. } => match self.chosen_children(attrs) {
                Some(chosen) => {
                    for (_, c) in chosen {
                        c.select_into(attrs, out);
                    }
                    true
                }
                None => false,
            },
        }
    }

    /// Lexicographically smallest satisfied child set of size `threshold`.
    fn chosen_children(&self, attrs: &BTreeSet<AttributeId>) -> Option<Vec<(u64, &AccessNode)>> {
        let AccessNode::Gate {
            threshold,
            children,
        } = self
        else {
            return None;
        };
        let chosen: Vec<_> = children
            .iter()
            .enumerate()
            .filter(|(_, c)| c.satisfies(attrs))
            .take(*threshold as usize)
            .map(|(j, c)| (j as u64 + 1, c))
            .collect();
        (chosen.len() == *threshold as usize).then_some(chosen)
    }

    /// Splits `secret` over the tree.
    pub fn share_secret<F: Field, R: RngCore + ?Sized>(&self, secret: F, rng: &mut R) -> Result<ShareMap<F>> {
        self.validate()?;
        let mut shares = ShareMap::new();
        self.share_into(secret, rng, &mut shares);
        Ok(shares)
    }

    fn share_into<F: Field, R: RngCore + ?Sized>(&self, value: F, rng: &mut R, out: &mut ShareMap<F>) {
        match self {
            AccessNode::Leaf(a) => {
                out.insert(*a, value);
            }
            AccessNode::Gate {
                threshold,
                children,
            } => {
                // coefficients of q, q(0) = value, degree threshold - 1
                let mut coeffs = vec![value];
                coeffs.extend((1..*threshold).map(|_| F::random(rng)));
                for (j, child) in children.iter().enumerate() {
                    let share = eval_poly(&coeffs, F::from_u64(j as u64 + 1));
                    child.share_into(share, rng, out);
                }
            }
        }
    }

    /// Recombines `e(g,g2)^{p_leaf · s}` leaf values into `e(g,g2)^{p_root(0) · s}`.
    ///
    /// Only the leaves named by [`selected_leaves`](Self::selected_leaves) need a value.
    pub fn reconstruct_in_target<B: Backend>(
        &self,
        leaf_values: &BTreeMap<AttributeId, B::Target>,
        attrs: &BTreeSet<AttributeId>,
    ) -> Result<B::Target> {
        match self {
            AccessNode::Leaf(a) => {
                if !attrs.contains(a) {
                    return Err(Error::PolicyNotSatisfied);
                }
                leaf_values
                    .get(a)
                    .cloned()
                    .ok_or_else(|| Error::Argument(format!("no leaf value supplied for {a}")))
            }
            AccessNode::Gate { .. } => {
                let chosen = self.chosen_children(attrs).ok_or(Error::PolicyNotSatisfied)?;
                let points: Vec<B::Scalar> = chosen.iter().map(|(j, _)| B::Scalar::from_u64(*j)).collect();
                let mut acc = B::Target::identity();
                for (pos, (_, child)) in chosen.iter().enumerate() {
                    let value = child.reconstruct_in_target::<B>(leaf_values, attrs)?;
                    let coeff = lagrange_coefficient(points[pos], &points)?;
                    acc = acc.mul(&value.pow(&coeff));
                }
                Ok(acc)
            }
        }
    }
}

fn eval_poly<F: Field>(coeffs: &[F], x: F) -> F {
    coeffs.iter().rev().fold(F::zero(), |acc, c| acc.mul(&x).add(c))
}

/// `Δ_{i,S}(0) = ∏_{j ∈ S, j ≠ i} (0 - j) / (i - j)`.
pub fn lagrange_coefficient<F: Field>(i: F, points: &[F]) -> Result<F> {
    let distinct: BTreeSet<_> = points.iter().collect();
    if distinct.len() != points.len() {
        return Err(Error::Argument("duplicate interpolation points".into()));
    }
    if !points.contains(&i) {
        return Err(Error::Argument("interpolation point not in the point set".into()));
    }
    if points.iter().any(Field::is_zero) {
        return Err(Error::Argument("interpolation points must be nonzero".into()));
    }
    let mut num = F::one();
    let mut den = F::one();
    for j in points.iter().filter(|j| **j != i) {
        num = num.mul(&j.neg());
        den = den.mul(&i.sub(j));
    }
    num.div(&den)
        .ok_or_else(|| Error::Argument("degenerate interpolation points".into()))
}

impl fmt::Display for AccessNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AccessNode::Leaf(a) => write!(f, "(leaf {a})"),
            AccessNode::Gate {
                threshold,
                children,
            } => {
                write!(f, "({threshold}of{}", children.len())?;
                for c in children {
                    write!(f, " {c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl FromStr for AccessNode {
    type Err = Error;

    /// Parses `(2of3 (leaf 1:4) (leaf 1:7) (1of2 (leaf 2:1) (leaf 2:2)))`.
    fn from_str(s: &str) -> Result<Self> {
        let tokens = tokenize(s);
        let mut pos = 0;
        let node = parse_node(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::Structure(format!("trailing input after position {pos}")));
        }
        node.validate()?;
        Ok(node)
    }
}

fn tokenize(s: &str) -> Vec<String> {
    s.replace('(', " ( ")
        .replace(')', " ) ")
        .split_whitespace()
        .map(str::to_owned)
        .collect()
}

fn parse_node(tokens: &[String], pos: &mut usize) -> Result<AccessNode> {
    let eof = || Error::Structure("unexpected end of policy".into());
    let expect = |tok: Option<&String>, want: &str| match tok {
        Some(t) if t == want => Ok(()),
        Some(t) => Err(Error::Structure(format!("expected `{want}`, found `{t}`"))),
        None => Err(eof()),
    };
    expect(tokens.get(*pos), "(")?;
    *pos += 1;
    let head = tokens.get(*pos).ok_or_else(eof)?.clone();
    *pos += 1;
    let node = if head == "leaf" {
        let attr = tokens.get(*pos).ok_or_else(eof)?;
        *pos += 1;
        AccessNode::Leaf(attr.parse().map_err(|e: Error| Error::Structure(e.to_string()))?)
    } else {
        let (n, m) = head
            .split_once("of")
            .and_then(|(n, m)| Some((n.parse::<u32>().ok()?, m.parse::<usize>().ok()?)))
            .ok_or_else(|| Error::Structure(format!("unknown node `{head}`")))?;
        let mut children = Vec::new();
        while tokens.get(*pos).map(String::as_str) == Some("(") {
            children.push(parse_node(tokens, pos)?);
        }
        if children.len() != m {
            return Err(Error::Structure(format!(
                "gate `{head}` declares {m} children but has {}",
                children.len()
            )));
        }
        if n as usize > m || n == 0 {
            return Err(Error::Structure(format!("threshold {n} exceeds arity {m}")));
        }
        AccessNode::Gate {
            threshold: n,
            children,
        }
    };
    expect(tokens.get(*pos), ")")?;
    *pos += 1;
    Ok(node)
}
