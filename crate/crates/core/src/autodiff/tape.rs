use std::cell::RefCell;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const CONSTANT: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Op {
    Leaf,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    /// a + c
    AddConst,
    /// a - c
    SubConst,
    /// c - a
    ConstSub,
    /// a * c
    MulConst,
    /// a / c
    DivConst,
    /// c / a
    ConstDiv,
    Tanh,
    Sin,
    Cos,
}

#[derive(Clone, Copy, Debug)]
struct Node {
    op: Op,
    a: u32,
    b: u32,
    aux: f64,
    value: f64,
}

thread_local! {
    static ACTIVE: RefCell<Option<Vec<Node>>> = const { RefCell::new(None) };
}

fn push(op: Op, a: u32, b: u32, aux: f64, value: f64) -> Tracked {
    ACTIVE.with(|cell| {
        let mut guard = cell.borrow_mut();
        let nodes = guard
            .as_mut()
            .expect("tracked arithmetic outside of an active tape");
        let index = nodes.len() as u32;
        assert!(index != CONSTANT, "tape overflow");
        nodes.push(Node {
            op,
            a,
            b,
            aux,
            value,
        });
        Tracked { value, index }
    })
}

/// A scalar whose arithmetic is recorded on the thread's active tape.
///
/// Constants (anything created through [`Scalar::from_f64`]) never touch the
/// tape; only values that depend on a leaf do.
#[derive(Clone, Copy, Debug)]
pub struct Tracked {
    value: f64,
    index: u32,
}

impl Tracked {
    #[inline]
    pub fn is_constant(&self) -> bool {
        self.index == CONSTANT
    }

    #[inline]
    fn constant(value: f64) -> Self {
        Tracked {
            value,
            index: CONSTANT,
        }
    }
}

impl Scalar for Tracked {
    #[inline]
    fn is_structural_zero(self) -> bool {
        self.is_constant() && self.value == 0.0
    }

    #[inline]
    fn from_f64(v: f64) -> Self {
        Tracked::constant(v)
    }

    #[inline]
    fn value(self) -> f64 {
        self.value
    }

    #[inline]
    fn relu(self) -> Self {
        if self.value > 0.0 {
            self
        } else {
            Tracked::constant(0.0)
        }
    }

    fn tanh(self) -> Self {
        let v = self.value.tanh();
        if self.is_constant() {
            Tracked::constant(v)
        } else {
            push(Op::Tanh, self.index, CONSTANT, 0.0, v)
        }
    }

    fn sin(self) -> Self {
        let v = self.value.sin();
        if self.is_constant() {
            Tracked::constant(v)
        } else {
            push(Op::Sin, self.index, CONSTANT, 0.0, v)
        }
    }

    fn cos(self) -> Self {
        let v = self.value.cos();
        if self.is_constant() {
            Tracked::constant(v)
        } else {
            push(Op::Cos, self.index, CONSTANT, 0.0, v)
        }
    }

    #[inline]
    fn abs(self) -> Self {
        if self.value > 0.0 {
            self
        } else if self.value < 0.0 {
            -self
        } else {
            Tracked::constant(0.0)
        }
    }
}

impl Add for Tracked {
    type Output = Tracked;
    #[inline]
    fn add(self, rhs: Tracked) -> Tracked {
        let v = self.value + rhs.value;
        match (self.is_constant(), rhs.is_constant()) {
            (true, true) => Tracked::constant(v),
            (false, true) => {
                if rhs.value == 0.0 {
                    self
                } else {
                    push(Op::AddConst, self.index, CONSTANT, rhs.value, v)
                }
            }
            (true, false) => {
                if self.value == 0.0 {
                    rhs
                } else {
                    push(Op::AddConst, rhs.index, CONSTANT, self.value, v)
                }
            }
            (false, false) => push(Op::Add, self.index, rhs.index, 0.0, v),
        }
    }
}

impl Sub for Tracked {
    type Output = Tracked;
    #[inline]
    fn sub(self, rhs: Tracked) -> Tracked {
        let v = self.value - rhs.value;
        match (self.is_constant(), rhs.is_constant()) {
            (true, true) => Tracked::constant(v),
            (false, true) => {
                if rhs.value == 0.0 {
                    self
                } else {
                    push(Op::SubConst, self.index, CONSTANT, rhs.value, v)
                }
            }
            (true, false) => push(Op::ConstSub, rhs.index, CONSTANT, self.value, v),
            (false, false) => push(Op::Sub, self.index, rhs.index, 0.0, v),
        }
    }
}

impl Mul for Tracked {
    type Output = Tracked;
    #[inline]
    fn mul(self, rhs: Tracked) -> Tracked {
        let v = self.value * rhs.value;
        match (self.is_constant(), rhs.is_constant()) {
            (true, true) => Tracked::constant(v),
            (false, true) => {
                if rhs.value == 1.0 {
                    self
                } else if rhs.value == 0.0 && self.value.is_finite() {
                    Tracked::constant(v)
                } else {
                    push(Op::MulConst, self.index, CONSTANT, rhs.value, v)
                }
            }
            (true, false) => {
                if self.value == 1.0 {
                    rhs
                } else if self.value == 0.0 && rhs.value.is_finite() {
                    Tracked::constant(v)
                } else {
                    push(Op::MulConst, rhs.index, CONSTANT, self.value, v)
                }
            }
            (false, false) => push(Op::Mul, self.index, rhs.index, 0.0, v),
        }
    }
}

impl Div for Tracked {
    type Output = Tracked;
    #[inline]
    fn div(self, rhs: Tracked) -> Tracked {
        let v = self.value / rhs.value;
        match (self.is_constant(), rhs.is_constant()) {
            (true, true) => Tracked::constant(v),
            (false, true) => push(Op::DivConst, self.index, CONSTANT, rhs.value, v),
            (true, false) => push(Op::ConstDiv, rhs.index, CONSTANT, self.value, v),
            (false, false) => push(Op::Div, self.index, rhs.index, 0.0, v),
        }
    }
}

impl Neg for Tracked {
    type Output = Tracked;
    #[inline]
    fn neg(self) -> Tracked {
        if self.is_constant() {
            Tracked::constant(-self.value)
        } else {
            push(Op::Neg, self.index, CONSTANT, 0.0, -self.value)
        }
    }
}

impl AddAssign for Tracked {
    #[inline]
    fn add_assign(&mut self, rhs: Tracked) {
        *self = *self + rhs;
    }
}

impl SubAssign for Tracked {
    #[inline]
    fn sub_assign(&mut self, rhs: Tracked) {
        *self = *self - rhs;
    }
}

impl MulAssign for Tracked {
    #[inline]
    fn mul_assign(&mut self, rhs: Tracked) {
        *self = *self * rhs;
    }
}

impl Sum for Tracked {
    fn sum<I: Iterator<Item = Tracked>>(iter: I) -> Tracked {
        iter.fold(Tracked::constant(0.0), |acc, x| acc + x)
    }
}

/// A finished recording: nodes in topological (insertion) order plus the
/// indices of the leaves in the order they were created.
#[derive(Clone, Debug)]
pub struct Tape {
    nodes: Vec<Node>,
    leaves: Vec<u32>,
}

struct ResetGuard;

impl Drop for ResetGuard {
    fn drop(&mut self) {
        ACTIVE.with(|cell| cell.borrow_mut().take());
    }
}

/// Record `f` on a fresh tape with one leaf per entry of `params`.
///
/// Fails if a tape is already active on this thread.
pub fn record<R>(params: &[f64], f: impl FnOnce(&[Tracked]) -> R) -> Result<(Tape, R)> {
    let already = ACTIVE.with(|cell| cell.borrow().is_some());
    if already {
        return Err(Error::Tape("nested recording on one thread"));
    }
    ACTIVE.with(|cell| *cell.borrow_mut() = Some(Vec::with_capacity(1 << 14)));
    let guard = ResetGuard;
    let leaves: Vec<Tracked> = params
        .iter()
        .map(|&p| push(Op::Leaf, CONSTANT, CONSTANT, 0.0, p))
        .collect();
    let out = f(&leaves);
    let nodes = ACTIVE.with(|cell| cell.borrow_mut().take()).unwrap_or_default();
    drop(guard);
    let tape = Tape {
        nodes,
        leaves: leaves.iter().map(|l| l.index).collect(),
    };
    Ok((tape, out))
}

/// Value and gradient of a scalar function of `params`.
pub fn grad(params: &[f64], f: impl FnOnce(&[Tracked]) -> Tracked) -> Result<(f64, Vec<f64>)> {
    let (tape, out) = record(params, f)?;
    if !out.value.is_finite() || tape.nodes.iter().any(|n| !n.value.is_finite()) {
        return Err(Error::NonFinite("forward pass"));
    }
    Ok((out.value, tape.gradient(out)))
}

impl Tape {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Reverse sweep seeded at `output`; returns d(output)/d(leaf) per leaf.
    pub fn gradient(&self, output: Tracked) -> Vec<f64> {
        let mut out = vec![0.0; self.leaves.len()];
        if output.is_constant() {
            return out;
        }
        let mut adj = vec![0.0; self.nodes.len()];
        adj[output.index as usize] = 1.0;
        for i in (0..=output.index as usize).rev() {
            let g = adj[i];
            if g == 0.0 {
                continue;
            }
            let node = self.nodes[i];
            let (a, b) = (node.a as usize, node.b as usize);
            match node.op {
                Op::Leaf => {}
                Op::Add => {
                    adj[a] += g;
                    adj[b] += g;
                }
                Op::Sub => {
                    adj[a] += g;
                    adj[b] -= g;
                }
                Op::Mul => {
                    adj[a] += g * self.nodes[b].value;
                    adj[b] += g * self.nodes[a].value;
                }
                Op::Div => {
                    let vb = self.nodes[b].value;
                    adj[a] += g / vb;
                    adj[b] -= g * node.value / vb;
                }
                Op::Neg | Op::ConstSub => adj[a] -= g,
                Op::AddConst | Op::SubConst => adj[a] += g,
                Op::MulConst => adj[a] += g * node.aux,
                Op::DivConst => adj[a] += g / node.aux,
                Op::ConstDiv => adj[a] -= g * node.value / self.nodes[a].value,
                Op::Tanh => adj[a] += g * (1.0 - node.value * node.value),
                Op::Sin => adj[a] += g * self.nodes[a].value.cos(),
                Op::Cos => adj[a] -= g * self.nodes[a].value.sin(),
            }
        }
        for (slot, &leaf) in out.iter_mut().zip(&self.leaves) {
            *slot = adj[leaf as usize];
        }
        out
    }

    /// Recompute every node value from new leaf values, in recording order.
    pub fn replay(&self, params: &[f64]) -> Result<Vec<f64>> {
        if params.len() != self.leaves.len() {
            return Err(Error::shape("replay", self.leaves.len(), params.len()));
        }
        let mut vals: Vec<f64> = Vec::with_capacity(self.nodes.len());
        let mut next_leaf = 0;
        for node in &self.nodes {
            let (a, b) = (node.a as usize, node.b as usize);
            let v = match node.op {
                Op::Leaf => {
                    let v = params[next_leaf];
                    next_leaf += 1;
                    v
                }
                Op::Add => vals[a] + vals[b],
                Op::Sub => vals[a] - vals[b],
                Op::Mul => vals[a] * vals[b],
                Op::Div => vals[a] / vals[b],
                Op::Neg => -vals[a],
                Op::AddConst => vals[a] + node.aux,
                Op::SubConst => vals[a] - node.aux,
                Op::ConstSub => node.aux - vals[a],
                Op::MulConst => vals[a] * node.aux,
                Op::DivConst => vals[a] / node.aux,
                Op::ConstDiv => node.aux / vals[a],
                Op::Tanh => f64::tanh(vals[a]),
                Op::Sin => f64::sin(vals[a]),
                Op::Cos => f64::cos(vals[a]),
            };
            vals.push(v);
        }
        Ok(vals)
    }

    /// Value of `x` under a replay vector produced by [`Tape::replay`].
    pub fn lookup(replayed: &[f64], x: Tracked) -> f64 {
        if x.is_constant() {
            x.value
        } else {
            replayed[x.index as usize]
        }
    }

    /// Recorded forward value of every node.
    pub fn values(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.value).collect()
    }
}
