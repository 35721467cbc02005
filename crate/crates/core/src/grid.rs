//! Uniform grids and the assignment of coordinate bits to register qubits.

use crate::error::{Error, Result};

/// One discretized coordinate: `2^qubits` points `x_s = start + s (end - start) / 2^qubits`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub qubits: usize,
}

impl Axis {
    pub fn new(start: f64, end: f64, qubits: usize) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || end <= start {
            return Err(Error::Argument(format!(
                "interval [{start}, {end}) is empty or not finite"
            )));
        }
        if qubits == 0 || qubits > 62 {
            return Err(Error::Argument(format!(
                "qubit count {qubits} outside 1..=62"
            )));
        }
        Ok(Self { start, end, qubits })
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn points(&self) -> usize {
        1usize << self.qubits
    }

    /// Grid spacing `(b - a) / 2^m`.
    pub fn spacing(&self) -> f64 {
        self.length() / self.points() as f64
    }

    pub fn x(&self, s: usize) -> f64 {
        self.start + self.spacing() * s as f64
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.points()).map(|s| self.x(s)).collect()
    }

    /// Contribution of bit `k` (0 = most significant) to the coordinate.
    pub fn bit_weight(&self, k: usize) -> f64 {
        self.length() * 0.5f64.powi(k as i32 + 1)
    }

    /// Same interval with a different resolution.
    pub fn with_qubits(&self, qubits: usize) -> Result<Self> {
        Self::new(self.start, self.end, qubits)
    }
}

/// Qubit layout of a multivariate register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QubitOrder {
    /// All bits of dimension 0 (most significant first), then dimension 1, ...
    A,
    /// Most significant bits of every dimension, then the next significance, ...
    B,
}

impl std::str::FromStr for QubitOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(QubitOrder::A),
            "B" => Ok(QubitOrder::B),
            other => Err(Error::Parse(format!(
                "unknown ordering '{other}', expected A or B"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
    order: QubitOrder,
}

impl Grid {
    pub fn new(axes: Vec<Axis>, order: QubitOrder) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Argument("a grid needs at least one axis".into()));
        }
        if order == QubitOrder::B && axes.iter().any(|a| a.qubits != axes[0].qubits) {
            return Err(Error::Argument(
                "ordering B requires the same qubit count on every axis".into(),
            ));
        }
        Ok(Self { axes, order })
    }

    pub fn one_d(axis: Axis) -> Self {
        Self {
            axes: vec![axis],
            order: QubitOrder::A,
        }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, dim: usize) -> &Axis {
        &self.axes[dim]
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn order(&self) -> QubitOrder {
        self.order
    }

    pub fn total_qubits(&self) -> usize {
        self.axes.iter().map(|a| a.qubits).sum()
    }

    pub fn coordinates(&self, dim: usize) -> Result<Vec<f64>> {
        self.axes.get(dim).map(Axis::coordinates).ok_or_else(|| {
            Error::Argument(format!(
                "dimension {dim} not in a {}-dimensional grid",
                self.dims()
            ))
        })
    }

    pub fn ordering_map(&self) -> OrderingMap {
        OrderingMap::new(
            &self.axes.iter().map(|a| a.qubits).collect::<Vec<_>>(),
            self.order,
        )
    }

    pub fn with_order(&self, order: QubitOrder) -> Result<Self> {
        Self::new(self.axes.clone(), order)
    }
}

/// Chain position of every (dimension, significance) bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderingMap {
    positions: Vec<Vec<usize>>,
}

impl OrderingMap {
    pub fn new(qubits: &[usize], order: QubitOrder) -> Self {
        let dims = qubits.len();
        let positions = match order {
            QubitOrder::A => {
                let mut offset = 0;
                qubits
                    .iter()
                    .map(|&m| {
                        let p = (offset..offset + m).collect();
                        offset += m;
                        p
                    })
                    .collect()
            }
            QubitOrder::B => (0..dims)
                .map(|d| (0..qubits[d]).map(|k| k * dims + d).collect())
                .collect(),
        };
        Self { positions }
    }

    /// Build from explicit positions, checking that they form a bijection onto `0..n`.
    pub fn from_positions(positions: Vec<Vec<usize>>) -> Result<Self> {
        let n: usize = positions.iter().map(Vec::len).sum();
        let mut seen = vec![false; n];
        for &p in positions.iter().flatten() {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Argument(format!(
                    "position {p} repeated or out of range"
                )));
            }
        }
        Ok(Self { positions })
    }

    pub fn position(&self, dim: usize, significance: usize) -> usize {
        self.positions[dim][significance]
    }

    pub fn positions(&self) -> &[Vec<usize>] {
        &self.positions
    }

    pub fn total_qubits(&self) -> usize {
        self.positions.iter().map(Vec::len).sum()
    }

    /// `(dimension, significance)` for every chain position.
    pub fn inverse(&self) -> Vec<(usize, usize)> {
        let mut inv = vec![(0, 0); self.total_qubits()];
        for (d, ps) in self.positions.iter().enumerate() {
            for (k, &p) in ps.iter().enumerate() {
                inv[p] = (d, k);
            }
        }
        inv
    }

    /// `perm[i]` is the position in `other` of the bit sitting at position `i` in `self`.
    pub fn permutation_to(&self, other: &OrderingMap) -> Result<Vec<usize>> {
        let same = self.positions.len() == other.positions.len()
            && self
                .positions
                .iter()
                .zip(&other.positions)
                .all(|(a, b)| a.len() == b.len());
        if !same {
            return Err(Error::Argument(
                "ordering maps cover different bit sets".into(),
            ));
        }
        Ok(self
            .inverse()
            .into_iter()
            .map(|(d, k)| other.position(d, k))
            .collect())
    }
}
