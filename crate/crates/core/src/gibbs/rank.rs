use crate::linalg::Matrix;
use crate::stationary::TimeSeriesPanel;

/// Per-variable ordering of the observed data. Only strict inequalities
/// constrain the latent panel, so each value class is bounded by its
/// neighbouring classes.
#[derive(Debug, Clone, PartialEq)]
pub struct RankStructure {
    levels: Vec<Vec<f64>>,
    class: Vec<Vec<usize>>,
    members: Vec<Vec<Vec<usize>>>,
}

impl RankStructure {
    pub fn from_panel(panel: &TimeSeriesPanel) -> Self {
        Self::from_matrix(panel.values())
    }

    pub fn from_matrix(y: &Matrix) -> Self {
        let (t_len, n) = y.shape();
        let mut levels = Vec::with_capacity(n);
        let mut class = Vec::with_capacity(n);
        let mut members = Vec::with_capacity(n);
        for i in 0..n {
            let col: Vec<f64> = y.column(i).iter().copied().collect();
            let mut uniq = col.clone();
            uniq.sort_by(|a, b| a.total_cmp(b));
            uniq.dedup();
            let cls: Vec<usize> = col
                .iter()
                .map(|v| uniq.binary_search_by(|u| u.total_cmp(v)).expect("value present"))
                .collect();
            let mut mem = vec![Vec::new(); uniq.len()];
            for t in 0..t_len {
                mem[cls[t]].push(t);
            }
            levels.push(uniq);
            class.push(cls);
            members.push(mem);
        }
        Self {
            levels,
            class,
            members,
        }
    }

    pub fn n(&self) -> usize {
        self.levels.len()
    }

    pub fn len(&self) -> usize {
        self.class.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sorted unique observed values of variable i.
    pub fn levels(&self, i: usize) -> &[f64] {
        &self.levels[i]
    }

    /// Index into `levels(i)` of y_{t,i}.
    pub fn class_of(&self, t: usize, i: usize) -> usize {
        self.class[i][t]
    }

    /// Times whose observation of variable i falls in value class c.
    pub fn members(&self, i: usize, c: usize) -> &[usize] {
        &self.members[i][c]
    }

    pub fn n_classes(&self, i: usize) -> usize {
        self.levels[i].len()
    }
}

/// Truncation bounds (L, U) for x_{t,i}: the largest latent value among
/// strictly smaller observations and the smallest among strictly larger.
pub fn compute_rank_bounds(rank: &RankStructure, x: &Matrix, t: usize, i: usize) -> (f64, f64) {
    let c = rank.class_of(t, i);
    let lo = if c == 0 {
        f64::NEG_INFINITY
    } else {
        rank.members(i, c - 1)
            .iter()
            .map(|&s| x[(s, i)])
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let hi = if c + 1 == rank.n_classes(i) {
        f64::INFINITY
    } else {
        rank.members(i, c + 1)
            .iter()
            .map(|&s| x[(s, i)])
            .fold(f64::INFINITY, f64::min)
    };
    (lo, hi)
}

/// True when every cell of x lies strictly inside its rank bounds.
pub fn respects_ranks(rank: &RankStructure, x: &Matrix) -> bool {
    for i in 0..rank.n() {
        for t in 0..rank.len() {
            let (lo, hi) = compute_rank_bounds(rank, x, t, i);
            let v = x[(t, i)];
            if !(v > lo && v < hi) {
                return false;
            }
        }
    }
    true
}
