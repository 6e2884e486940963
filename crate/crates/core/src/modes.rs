//! Local-maximum detection on sampled functions over a neighbourhood graph.
//!
//! Maxima are found by tracking connected components of superlevel sets: each
//! component is born at a peak and dies when it merges into a component with a
//! higher peak. A peak's persistence (birth minus death value) is its
//! prominence, which lets plateaus count once and quadrature ripples be
//! filtered by a floor.

/// Relative prominence below which a maximum is treated as ripple.
pub const RIPPLE_FLOOR: f64 = 1e-3;

/// Maxima closer than this (degrees) are merged into one.
pub const MERGE_RADIUS_DEG: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub node: usize,
    pub value: f64,
    /// Prominence; `f64::INFINITY` for the global maximum.
    pub persistence: f64,
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }
}

/// All peaks of `values` over the graph given by `neighbors`, in decreasing
/// order of value. Ties are broken by node index (lower index is treated as
/// higher), so node order encodes the caller's tie-break rule.
pub fn peaks(values: &[f64], mut neighbors: impl FnMut(usize, &mut Vec<usize>)) -> Vec<Peak> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let mut set = DisjointSet::new(n);
    let mut seen = vec![false; n];
    // birth node of each root's component
    let mut birth = vec![usize::MAX; n];
    let mut out = Vec::new();
    let mut scratch = Vec::new();

    for &i in &order {
        seen[i] = true;
        scratch.clear();
        neighbors(i, &mut scratch);
        let mut roots: Vec<usize> = scratch
            .iter()
            .filter(|&&j| seen[j])
            .map(|&j| set.find(j))
            .collect();
        roots.sort_unstable();
        roots.dedup();
        if roots.is_empty() {
            birth[i] = i;
            continue;
        }
        // the oldest component (highest birth) survives
        let rank = |r: usize| birth[r];
        let keep = *roots
            .iter()
            .min_by(|&&a, &&b| {
                let (pa, pb) = (rank(a), rank(b));
                values[pb].total_cmp(&values[pa]).then(pa.cmp(&pb))
            })
            .unwrap();
        for &r in &roots {
            if r != keep {
                let peak = birth[r];
                out.push(Peak {
                    node: peak,
                    value: values[peak],
                    persistence: values[peak] - values[i],
                });
                set.parent[r] = keep;
            }
        }
        set.parent[i] = keep;
    }
    let mut survivors: Vec<usize> = (0..n).filter(|&i| set.find(i) == i).collect();
    survivors.sort_unstable();
    for r in survivors {
        let peak = birth[r];
        out.push(Peak {
            node: peak,
            value: values[peak],
            persistence: f64::INFINITY,
        });
    }
    out.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.node.cmp(&b.node)));
    out
}

/// Peaks whose prominence reaches `RIPPLE_FLOOR` of the value range, merged
/// greedily (strongest first) within `MERGE_RADIUS_DEG` using `distance_deg`.
pub fn significant_peaks(
    values: &[f64],
    neighbors: impl FnMut(usize, &mut Vec<usize>),
    distance_deg: impl Fn(usize, usize) -> f64,
) -> Vec<Peak> {
    let (lo, hi) = value_range(values);
    peaks_above(values, RIPPLE_FLOOR * (hi - lo), neighbors, distance_deg)
}

pub(crate) fn value_range(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Peaks with prominence above an absolute `floor`, merged within
/// `MERGE_RADIUS_DEG`.
pub fn peaks_above(
    values: &[f64],
    floor: f64,
    neighbors: impl FnMut(usize, &mut Vec<usize>),
    distance_deg: impl Fn(usize, usize) -> f64,
) -> Vec<Peak> {
    if values.is_empty() {
        return Vec::new();
    }
    let all = peaks(values, neighbors);
    let mut kept: Vec<Peak> = Vec::new();
    for p in all.into_iter().filter(|p| p.persistence > floor || p.persistence.is_infinite()) {
        if kept
            .iter()
            .all(|k| distance_deg(k.node, p.node) >= MERGE_RADIUS_DEG)
        {
            kept.push(p);
        }
    }
    kept
}

/// Significant peaks of a periodic sequence spanning 360°.
pub fn circular_peaks(values: &[f64]) -> Vec<Peak> {
    let n = values.len();
    let step = 360.0 / n as f64;
    significant_peaks(
        values,
        |i, out| {
            out.push((i + 1) % n);
            out.push((i + n - 1) % n);
        },
        |a, b| {
            let d = a.abs_diff(b).min(n - a.abs_diff(b));
            d as f64 * step
        },
    )
}
