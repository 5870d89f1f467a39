//! Planar geometry layer: orientation predicate, incremental convex hulls
//! over x1-sorted point streams, and the linear-time constrained-Minkowski
//! candidate-set sweep.
//!
//! Coordinates are plain `f64`; the orientation predicate is the
//! double-precision cross product with no exact arithmetic. Whenever a
//! pruning decision hits an exact tie, the point in question is retained:
//! extra candidates never hurt correctness, dropped ones might.

use std::ops::{Add, Sub};

use crate::{Error, Result};

/// A point in the (interval length, partial sum) plane.
#[derive(Clone, Copy, PartialEq, Debug, Default)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub fn new(x1: f64, x2: f64) -> Self {
        Point2 { x1, x2 }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x1 + o.x1, self.x2 + o.x2)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x1 - o.x1, self.x2 - o.x2)
    }
}

/// Cross product of two direction vectors.
#[inline]
pub fn cross(u: Point2, v: Point2) -> f64 {
    u.x1 * v.x2 - u.x2 * v.x1
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Orientation {
    Ccw,
    Cw,
    Collinear,
}

/// Sign of `(b - a) x (c - a)`; `Collinear` is the exact zero of the
/// double-precision expression.
#[inline]
pub fn orientation(a: Point2, b: Point2, c: Point2) -> Orientation {
    let v = cross(b - a, c - a);
    if v > 0.0 {
        Orientation::Ccw
    } else if v < 0.0 {
        Orientation::Cw
    } else {
        Orientation::Collinear
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Side {
    Upper,
    Lower,
}

/// One monotone chain of a convex hull, vertices strictly increasing in x1.
#[derive(Clone, Debug)]
pub struct HullChain {
    pub vertices: Vec<Point2>,
    pub side: Side,
}

impl HullChain {
    /// Check the chain invariants: strictly increasing x1 and non-left
    /// (upper) / non-right (lower) consecutive turns.
    pub fn is_valid(&self) -> bool {
        let v = &self.vertices;
        // NaN coordinates compare unordered and must invalidate the chain
        if v.windows(2).any(|w| w[0].x1.partial_cmp(&w[1].x1) != Some(std::cmp::Ordering::Less)) {
            return false;
        }
        v.windows(3).all(|w| {
            let o = orientation(w[0], w[1], w[2]);
            match self.side {
                Side::Upper => o != Orientation::Ccw,
                Side::Lower => o != Orientation::Cw,
            }
        })
    }
}

/// Insertion direction for [`IncrementalHull`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum InsertDir {
    /// Points arrive with strictly increasing x1 (prefix hulls).
    Rightward,
    /// Points arrive with strictly decreasing x1 (suffix hulls).
    Leftward,
}

/// Incremental Graham scan over an x1-monotone point stream.
///
/// Each insertion is amortized O(1). After an insertion the hull of all
/// points seen so far is available, along with the chain neighbors of the
/// newest point (which is always a hull vertex, being an x1 extreme).
/// Collinear interior points are dropped from the chains (strict turns).
pub struct IncrementalHull {
    dir: InsertDir,
    // chains in insertion order; the newest vertex is the last element
    upper: Vec<Point2>,
    lower: Vec<Point2>,
    last_x1: Option<f64>,
    pops: u64,
}

impl IncrementalHull {
    pub fn new(dir: InsertDir) -> Self {
        IncrementalHull { dir, upper: Vec::new(), lower: Vec::new(), last_x1: None, pops: 0 }
    }

    pub fn insert(&mut self, p: Point2) -> Result<()> {
        if !p.is_finite() {
            return Err(Error::InvalidArgument("non-finite hull point".into()));
        }
        if let Some(x) = self.last_x1 {
            let ordered = match self.dir {
                InsertDir::Rightward => p.x1 > x,
                InsertDir::Leftward => p.x1 < x,
            };
            if !ordered {
                return Err(Error::InvalidArgument(format!(
                    "hull insertion out of order: x1={} after x1={x}",
                    p.x1
                )));
            }
        }
        self.last_x1 = Some(p.x1);
        // Keep the middle vertex only on a strict turn of the required
        // sense; the sense flips with chain side and insertion direction.
        let (upper_keep, lower_keep) = match self.dir {
            InsertDir::Rightward => (Orientation::Cw, Orientation::Ccw),
            InsertDir::Leftward => (Orientation::Ccw, Orientation::Cw),
        };
        Self::scan(&mut self.upper, p, upper_keep, &mut self.pops);
        Self::scan(&mut self.lower, p, lower_keep, &mut self.pops);
        Ok(())
    }

    fn scan(chain: &mut Vec<Point2>, p: Point2, keep: Orientation, pops: &mut u64) {
        while chain.len() >= 2 {
            let a = chain[chain.len() - 1];
            let b = chain[chain.len() - 2];
            if orientation(b, a, p) == keep {
                break;
            }
            chain.pop();
            *pops += 1;
        }
        chain.push(p);
    }

    /// Upper-chain neighbor of the most recently inserted point.
    pub fn upper_neighbor(&self) -> Option<Point2> {
        (self.upper.len() >= 2).then(|| self.upper[self.upper.len() - 2])
    }

    /// Lower-chain neighbor of the most recently inserted point.
    pub fn lower_neighbor(&self) -> Option<Point2> {
        (self.lower.len() >= 2).then(|| self.lower[self.lower.len() - 2])
    }

    /// Current chains, normalized to increasing x1.
    pub fn chains(&self) -> (HullChain, HullChain) {
        let normalize = |v: &Vec<Point2>, side| {
            let mut vertices = v.clone();
            if self.dir == InsertDir::Leftward {
                vertices.reverse();
            }
            HullChain { vertices, side }
        };
        (normalize(&self.upper, Side::Upper), normalize(&self.lower, Side::Lower))
    }

    pub fn pops(&self) -> u64 {
        self.pops
    }
}

/// Incremental hull over `points` (strictly increasing in x1), inserting
/// left to right and returning the (upper, lower) chains after every
/// insertion.
pub fn incremental_hull(points: &[Point2]) -> Result<Vec<(HullChain, HullChain)>> {
    let mut hull = IncrementalHull::new(InsertDir::Rightward);
    let mut snapshots = Vec::with_capacity(points.len());
    for &p in points {
        hull.insert(p)?;
        snapshots.push(hull.chains());
    }
    Ok(snapshots)
}

/// The candidate set `R` with `vconv((P (+) Q)^+) ⊆ R ⊆ (P (+) Q)^+`.
#[derive(Clone, Debug)]
pub struct CandidateSet {
    /// The sums themselves, each with x1 > 0.
    pub points: Vec<Point2>,
    /// For each point, the (index into P, index into Q) pair it came from.
    pub pairs: Vec<(usize, usize)>,
    pub source_sizes: (usize, usize),
    /// Orientation tests + stack pops + deletions performed by the sweep;
    /// bounded by a fixed multiple of |P| + |Q|.
    pub ops: u64,
}

#[derive(Clone, Copy, Debug)]
struct QVertex {
    pt: Point2,
    idx: usize,
}

// Hull of the admitted Q suffix. Chains are stored with the leftmost
// (newest) vertex at the *end* of each Vec, so growth and pruning both
// happen at the Vec tail. The two chains always share their front vertex.
struct SuffixHull {
    upper: Vec<QVertex>,
    lower: Vec<QVertex>,
    ops: u64,
}

impl SuffixHull {
    fn push_left(&mut self, v: QVertex) {
        Self::scan(&mut self.upper, v, Orientation::Cw, &mut self.ops);
        Self::scan(&mut self.lower, v, Orientation::Ccw, &mut self.ops);
    }

    fn scan(chain: &mut Vec<QVertex>, v: QVertex, keep: Orientation, ops: &mut u64) {
        while chain.len() >= 2 {
            let a = chain[chain.len() - 1].pt;
            let b = chain[chain.len() - 2].pt;
            *ops += 1;
            // x1-increasing triple is (v, a, b)
            if orientation(v.pt, a, b) == keep {
                break;
            }
            chain.pop();
        }
        chain.push(v);
    }

    /// Length of the contiguous run of chain-front vertices whose hull-edge
    /// orientation test against direction `a` passes. A vertex passes when
    /// its incoming (left) edge slope still overlaps the normal cone that
    /// `a` spans with the vertical, so the run grows rightward from the
    /// chain front and stops at the first failing edge. The front vertex
    /// itself always passes (its cone reaches the vertical), and `a = None`
    /// admits the whole chain (degenerate single-point P suffix). Ties are
    /// retained.
    fn front_run(chain: &[QVertex], a: Option<Point2>, upper_side: bool, ops: &mut u64) -> usize {
        let len = chain.len();
        for k in 0..len {
            let pos = len - 1 - k;
            let include = match a {
                None => true,
                Some(a) => {
                    if k == 0 {
                        true
                    } else {
                        // left edge of chain[pos], pointing leftward toward
                        // the already-included neighbor
                        let e = chain[pos + 1].pt - chain[pos].pt;
                        *ops += 1;
                        let c = cross(a, e);
                        if upper_side {
                            c >= 0.0
                        } else {
                            c <= 0.0
                        }
                    }
                }
            };
            if !include {
                return k;
            }
        }
        len
    }

    /// Drop the front `run` vertices of `chain` except those carrying one of
    /// the two kept indices.
    fn prune_front(chain: &mut Vec<QVertex>, run: usize, keep_a: usize, keep_b: usize, ops: &mut u64) {
        if run == 0 {
            return;
        }
        let start = chain.len() - run;
        let mut kept: Vec<QVertex> =
            chain[start..].iter().copied().filter(|v| v.idx == keep_a || v.idx == keep_b).collect();
        *ops += (run - kept.len()) as u64;
        chain.truncate(start);
        chain.append(&mut kept);
    }
}

fn check_sorted(points: &[Point2], name: &str) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} must be nonempty")));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} contains non-finite coordinates")));
    }
    if points.windows(2).any(|w| w[0].x1 >= w[1].x1) {
        return Err(Error::InvalidArgument(format!("{name} must be strictly increasing in x1")));
    }
    Ok(())
}

/// Linear-time sweep producing a candidate superset of the vertices of the
/// constrained Minkowski sum `(P (+) Q)^+`.
///
/// `P` and `Q` must be sorted strictly increasing in x1, with the pairing
/// convention of the statistic engine: the sum `p_i + q_j` (1-based) has
/// x1 > 0 exactly when `i + j > |Q|`, so the sweep admits the last `i`
/// points of `Q` when it processes `p_i`.
///
/// For each `p_i` the sweep tests hull-edge orientations against the
/// current hull of the admitted Q suffix to collect the contact set `K_i`,
/// records `{p_i} (+) K_i`, then permanently discards both the suffix
/// points interior to the Q hull and the interior of `K_i`. Total work is
/// O(|P| + |Q|).
pub fn constrained_minkowski_candidates(pset: &[Point2], qset: &[Point2]) -> Result<CandidateSet> {
    check_sorted(pset, "P")?;
    check_sorted(qset, "Q")?;
    let (np, nq) = (pset.len(), qset.len());

    // Suffix hulls of P, built right to left; record each p_i's chain
    // neighbors at insertion time.
    let mut up_neighbor: Vec<Option<Point2>> = vec![None; np];
    let mut lo_neighbor: Vec<Option<Point2>> = vec![None; np];
    let mut phull = IncrementalHull::new(InsertDir::Leftward);
    for i in (0..np).rev() {
        phull.insert(pset[i])?;
        up_neighbor[i] = phull.upper_neighbor();
        lo_neighbor[i] = phull.lower_neighbor();
    }

    let mut qh = SuffixHull { upper: Vec::new(), lower: Vec::new(), ops: 0 };
    let mut points = Vec::new();
    let mut pairs = Vec::new();

    for step in 1..=np {
        if step <= nq {
            let qi = nq - step;
            qh.push_left(QVertex { pt: qset[qi], idx: qi });
        }
        if qh.upper.is_empty() {
            continue;
        }
        let ip = step - 1;
        let au = up_neighbor[ip].map(|nb| pset[ip] - nb);
        let al = lo_neighbor[ip].map(|nb| pset[ip] - nb);

        let ucnt = SuffixHull::front_run(&qh.upper, au, true, &mut qh.ops);
        let lcnt = SuffixHull::front_run(&qh.lower, al, false, &mut qh.ops);

        // K_i in cyclic order: deepest included upper vertex, along the
        // upper chain to the shared front, then down the lower chain.
        let ulen = qh.upper.len();
        let llen = qh.lower.len();
        let u_deep = (ucnt > 0).then(|| qh.upper[ulen - ucnt].idx);
        let mut ks: Vec<QVertex> = Vec::with_capacity(ucnt + lcnt);
        for k in (0..ucnt).rev() {
            ks.push(qh.upper[ulen - 1 - k]);
        }
        for k in 0..lcnt {
            let v = qh.lower[llen - 1 - k];
            if ucnt > 0 && k == 0 {
                continue; // shared front already collected
            }
            if u_deep == Some(v.idx) {
                continue; // both runs span to the same right endpoint
            }
            ks.push(v);
        }

        for v in &ks {
            points.push(pset[ip] + v.pt);
            pairs.push((ip, v.idx));
        }

        if ks.len() >= 3 {
            let keep_a = ks[0].idx;
            let keep_b = ks[ks.len() - 1].idx;
            SuffixHull::prune_front(&mut qh.upper, ucnt, keep_a, keep_b, &mut qh.ops);
            SuffixHull::prune_front(&mut qh.lower, lcnt, keep_a, keep_b, &mut qh.ops);
            // restore the shared-front invariant
            let fu = *qh.upper.last().unwrap();
            let fl = *qh.lower.last().unwrap();
            if fu.idx != fl.idx {
                if fu.pt.x1 < fl.pt.x1 {
                    qh.lower.push(fu);
                } else {
                    qh.upper.push(fl);
                }
            }
        }
    }

    let ops = qh.ops + phull.pops();
    Ok(CandidateSet { points, pairs, source_sizes: (np, nq), ops })
}
