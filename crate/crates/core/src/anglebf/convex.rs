//! Convex update via the lower envelope of the shifted cost functions
//! `f_i(x) = D_i + c(|alpha_i - x|_m)`.
//!
//! The envelope is kept directly over the sorted distinct outgoing angles
//! (positions `0..L`). Each incoming edge that owns part of the envelope owns
//! one contiguous circular run of positions. Boundaries are triples
//! `(x, p, q)`: positions just before `x` belong to `p`, positions from `x`
//! on belong to `q`. Triples live in a circular doubly linked list and in a
//! tree keyed by `x`; the angles of current owners live in a second tree.
//!
//! Functions are inserted by increasing `D`. A new function can only win at
//! angles strictly closer to its own `alpha` than to any owner's, so its
//! winning run always lies inside that Voronoi arc, which turns every search
//! below into a search on a linear range. The seed probe is taken at the
//! boundary between the two owners whose angles bracket the new `alpha`.

use std::cmp::Ordering;

use super::avl::{AvlTree, Step};
use super::cost::AngleCostFunction;
use super::local::{turning_angle, Assignment, OpCounters, VertexLocalProblem};
use super::step::sorted_by_distance;
use crate::error::{Error, Result};

const NIL: u32 = u32::MAX;

/// `D + c(|alpha - x|_m)` for one incoming edge.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedCost<'a> {
    pub dist: f64,
    pub angle: f64,
    pub f: &'a AngleCostFunction,
}

impl ShiftedCost<'_> {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.dist + self.f.evaluate(turning_angle(self.angle, x))
    }
}

/// Outgoing angles stored twice: as they are and rotated by 180 degrees, so
/// every arc shorter than 180 degrees is contiguous in one of the two trees.
#[derive(Debug, Clone)]
pub struct BetaTrees {
    direct: AvlTree<f64, ()>,
    shifted: AvlTree<f64, ()>,
}

impl BetaTrees {
    pub fn new(betas: &[f64]) -> Self {
        let mut direct = AvlTree::with_capacity(betas.len());
        let mut shifted = AvlTree::with_capacity(betas.len());
        for &b in betas {
            direct.insert(b, ());
            shifted.insert((b + 180.0) % 360.0, ());
        }
        Self { direct, shifted }
    }

    pub fn is_empty(&self) -> bool {
        self.direct.is_empty()
    }

    pub fn comparisons(&self) -> u64 {
        self.direct.comparisons() + self.shifted.comparisons()
    }
}

/// Clockwise offset from `from` to `to`, in `[0, 360)`.
#[inline]
fn cw(from: f64, to: f64) -> f64 {
    (to - from).rem_euclid(360.0)
}

/// The outgoing angle on the clockwise arc from `f_p`'s to `f_q`'s angle
/// where the two functions are closest to equal. Each tree is descended by
/// the sign of `f_p - f_q`; the tree in which the arc wraps past 0 is skipped.
/// `None` if no outgoing angle lies strictly inside the arc.
pub fn compute_intersection(fp: &ShiftedCost, fq: &ShiftedCost, trees: &BetaTrees) -> Option<f64> {
    let span = cw(fp.angle, fq.angle);
    let mut best: Option<(f64, f64)> = None;
    let mut consider = |beta: f64| {
        let gap = (fp.eval(beta) - fq.eval(beta)).abs();
        if best.is_none_or(|(_, g)| gap < g) {
            best = Some((beta, gap));
        }
    };
    let mut descended = false;
    for (tree, rot) in [(&trees.direct, 0.0), (&trees.shifted, 180.0)] {
        let lo = (fp.angle + rot) % 360.0;
        let hi = lo + span;
        if hi >= 360.0 {
            continue;
        }
        descended = true;
        tree.descend(|key, _| {
            if key <= lo {
                return Step::Right;
            }
            if key >= hi {
                return Step::Left;
            }
            let beta = (key - rot).rem_euclid(360.0);
            consider(beta);
            match fp.eval(beta).partial_cmp(&fq.eval(beta)) {
                Some(Ordering::Less) => Step::Right,
                Some(Ordering::Greater) => Step::Left,
                _ => Step::Stop,
            }
        });
    }
    if !descended {
        for key in trees.direct.keys() {
            let off = cw(fp.angle, key);
            if off > 0.0 && off < span {
                consider(key);
            }
        }
    }
    best.map(|(b, _)| b)
}

#[derive(Debug, Clone, Copy)]
struct Triple {
    x: u32,
    p: u32,
    q: u32,
    prev: u32,
    next: u32,
}

enum Mode {
    Empty,
    Single(u32),
    Frontier,
}

struct Kernel<'a> {
    f: &'a AngleCostFunction,
    dist: &'a [f64],
    alpha: &'a [f64],
    keys: Vec<f64>,
    c: OpCounters,
    mode: Mode,
    triples: Vec<Triple>,
    tx: AvlTree<u32, u32>,
    ta: AvlTree<f64, u32>,
    start: Vec<u32>,
    segs: Vec<u32>,
}

impl<'a> Kernel<'a> {
    #[inline]
    fn len(&self) -> u32 {
        self.keys.len() as u32
    }

    #[inline]
    fn eval(&mut self, i: u32, pos: u32) -> f64 {
        self.c.evaluations += 1;
        self.dist[i as usize] + self.f.evaluate(turning_angle(self.alpha[i as usize], self.keys[pos as usize]))
    }

    #[inline]
    fn beats(&mut self, i: u32, o: u32, pos: u32) -> bool {
        self.c.comparisons += 1;
        self.eval(i, pos) < self.eval(o, pos)
    }

    #[inline]
    fn closer(&mut self, i: u32, others: [u32; 2], pos: u32) -> bool {
        let b = self.keys[pos as usize];
        let d = turning_angle(self.alpha[i as usize], b);
        self.c.comparisons += 2;
        others.iter().all(|&o| d < turning_angle(self.alpha[o as usize], b))
    }

    /// First position whose key is `>= a`, wrapping to 0.
    fn lower_bound(&mut self, a: f64) -> u32 {
        self.c.comparisons += (usize::BITS - self.keys.len().leading_zeros()) as u64;
        let p = self.keys.partition_point(|&k| k < a) as u32;
        if p == self.len() {
            0
        } else {
            p
        }
    }

    /// Positions strictly closer to `alpha_i` than to both `others`, as a
    /// `(start, len)` clockwise run.
    fn voronoi(&mut self, i: u32, others: [u32; 2]) -> Option<(u32, u32)> {
        let n = self.len();
        let a = self.alpha[i as usize];
        let c0 = self.lower_bound(a);
        // size of the clockwise half [a, a + 180)
        let end = a + 180.0;
        self.c.comparisons += (usize::BITS - self.keys.len().leading_zeros()) as u64;
        let half = if end <= 360.0 {
            let e = self.keys.partition_point(|&k| k < end) as u32;
            let s = self.keys.partition_point(|&k| k < a) as u32;
            e - s
        } else {
            let s = self.keys.partition_point(|&k| k < a) as u32;
            (n - s) + self.keys.partition_point(|&k| k < end - 360.0) as u32
        };
        let (mut lo, mut hi) = (0u32, half);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.closer(i, others, (c0 + mid) % n) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let h_cw = lo;
        let (mut lo, mut hi) = (0u32, n - half);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.closer(i, others, (c0 + n - 1 - mid) % n) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let h_ccw = lo;
        let len = h_cw + h_ccw;
        (len > 0).then(|| ((c0 + n - h_ccw) % n, len))
    }

    #[inline]
    fn pos(&self, h: (u32, u32), off: u32) -> u32 {
        (h.0 + off) % self.len()
    }

    #[inline]
    fn off(&self, h: (u32, u32), pos: u32) -> Option<u32> {
        let o = (pos + self.len() - h.0) % self.len();
        (o < h.1).then_some(o)
    }

    #[inline]
    fn dist_cw(&self, a: u32, b: u32) -> u32 {
        (b + self.len() - a) % self.len()
    }

    /// Triple whose segment contains `pos`.
    fn governing(&mut self, pos: u32) -> u32 {
        self.c.tree_ops += 1;
        let ((_, &l), (xr, &r)) = self.tx.find_closest(pos).expect("frontier has triples");
        if xr == pos {
            r
        } else {
            l
        }
    }

    /// Smallest offset in `lo..=hi` where `i` beats `o`, given it does at `hi`.
    fn first_win(&mut self, i: u32, o: u32, h: (u32, u32), mut lo: u32, mut hi: u32) -> u32 {
        while lo < hi {
            let mid = (lo + hi) / 2;
            let p = self.pos(h, mid);
            if self.beats(i, o, p) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    /// Largest offset in `lo..=hi` where `i` beats `o`, given it does at `lo`.
    fn last_win(&mut self, i: u32, o: u32, h: (u32, u32), mut lo: u32, mut hi: u32) -> u32 {
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            let p = self.pos(h, mid);
            if self.beats(i, o, p) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }

    fn set_single(&mut self, s: u32) {
        for t in std::mem::take(&mut self.triples) {
            self.segs[t.q as usize] = 0;
        }
        self.tx = AvlTree::new();
        self.ta = AvlTree::new();
        self.mode = Mode::Single(s);
    }

    fn insert(&mut self, i: u32) {
        match self.mode {
            Mode::Empty => self.mode = Mode::Single(i),
            Mode::Single(s) => self.insert_single(s, i),
            Mode::Frontier => self.insert_frontier(i),
        }
    }

    fn insert_single(&mut self, s: u32, i: u32) {
        let n = self.len();
        let Some(h) = self.voronoi(i, [s, s]) else { return };
        // the winning run contains a neighbor of the antipode of alpha_s
        let anti = (self.alpha[s as usize] + 180.0) % 360.0;
        let right = self.lower_bound(anti);
        let left = (right + n - 1) % n;
        let mut seed = None;
        for p in [right, left] {
            if let Some(o) = self.off(h, p) {
                if self.beats(i, s, p) {
                    seed = Some(o);
                    break;
                }
            }
        }
        let Some(o) = seed else { return };
        let ra = self.first_win(i, s, h, 0, o);
        let rb = self.last_win(i, s, h, o, h.1 - 1);
        let (a, len) = (self.pos(h, ra), rb - ra + 1);
        if len == n {
            self.set_single(i);
            return;
        }
        let b1 = (a + len) % n;
        self.triples = vec![
            Triple { x: a, p: s, q: i, prev: 1, next: 1 },
            Triple { x: b1, p: i, q: s, prev: 0, next: 0 },
        ];
        self.c.tree_ops += 4;
        self.tx.insert(a, 0);
        self.tx.insert(b1, 1);
        self.ta.insert(self.alpha[s as usize], s);
        self.ta.insert(self.alpha[i as usize], i);
        self.start[i as usize] = 0;
        self.start[s as usize] = 1;
        self.segs[i as usize] = 1;
        self.segs[s as usize] = 1;
        self.mode = Mode::Frontier;
    }

    fn insert_frontier(&mut self, i: u32) {
        let a_i = self.alpha[i as usize];
        self.c.tree_ops += 1;
        let ((_, &p), (aq, &q)) = self.ta.find_closest(a_i).expect("frontier has owners");
        if aq == a_i {
            // same shape as an owner with no smaller distance
            return;
        }
        let Some(h) = self.voronoi(i, [p, q]) else { return };
        let st = self.start[p as usize];
        let boundary = if st != NIL && self.segs[p as usize] == 1 {
            let t = self.triples[self.triples[st as usize].next as usize];
            (t.p == p && t.q == q).then_some(t.x)
        } else {
            None
        };
        let Some(x) = boundary else {
            self.c.fallbacks += 1;
            return self.insert_exhaustive(i, h);
        };
        let n = self.len();
        let left = (x + n - 1) % n;
        let mut seed = None;
        if let Some(o) = self.off(h, left) {
            if self.beats(i, p, left) {
                seed = Some(o);
            }
        }
        if seed.is_none() {
            if let Some(o) = self.off(h, x) {
                if self.beats(i, q, x) {
                    seed = Some(o);
                }
            }
        }
        let Some(o) = seed else { return };
        let ra = self.expand_ccw(i, h, o);
        let rb = self.expand_cw(i, h, o);
        self.carve(i, self.pos(h, ra), rb - ra + 1);
    }

    /// Exhaustive scan of the Voronoi run.
    fn insert_exhaustive(&mut self, i: u32, h: (u32, u32)) {
        let mut first = None;
        let mut last = 0;
        for o in 0..h.1 {
            let p = self.pos(h, o);
            let g = self.governing(p);
            let owner = self.triples[g as usize].q;
            if self.beats(i, owner, p) {
                first.get_or_insert(o);
                last = o;
            }
        }
        if let Some(ra) = first {
            self.carve(i, self.pos(h, ra), last - ra + 1);
        }
    }

    /// Start offset of the winning run, which contains offset `o`.
    fn expand_ccw(&mut self, i: u32, h: (u32, u32), mut o: u32) -> u32 {
        let mut g = self.governing(self.pos(h, o));
        loop {
            let t = self.triples[g as usize];
            let d = self.dist_cw(t.x, self.pos(h, o));
            let fs = o.saturating_sub(d);
            if fs < o {
                let p = self.pos(h, fs);
                if !self.beats(i, t.q, p) {
                    return self.first_win(i, t.q, h, fs + 1, o);
                }
            }
            if fs == 0 {
                return 0;
            }
            g = t.prev;
            let prev_owner = self.triples[g as usize].q;
            let p = self.pos(h, fs - 1);
            if !self.beats(i, prev_owner, p) {
                return fs;
            }
            o = fs - 1;
        }
    }

    /// End offset of the winning run, which contains offset `o`.
    fn expand_cw(&mut self, i: u32, h: (u32, u32), mut o: u32) -> u32 {
        let mut g = self.governing(self.pos(h, o));
        loop {
            let t = self.triples[g as usize];
            let nx = self.triples[t.next as usize].x;
            let d = self.dist_cw(self.pos(h, o), nx);
            let d = if d == 0 { self.len() } else { d };
            let le = (o + d - 1).min(h.1 - 1);
            if le > o {
                let p = self.pos(h, le);
                if !self.beats(i, t.q, p) {
                    return self.last_win(i, t.q, h, o, le - 1);
                }
            }
            if le == h.1 - 1 {
                return le;
            }
            g = t.next;
            let next_owner = self.triples[g as usize].q;
            let p = self.pos(h, le + 1);
            if !self.beats(i, next_owner, p) {
                return le;
            }
            o = le + 1;
        }
    }

    fn new_triple(&mut self, t: Triple) -> u32 {
        self.triples.push(t);
        (self.triples.len() - 1) as u32
    }

    /// Makes `i` the owner of the `len` positions starting at `a`.
    fn carve(&mut self, i: u32, a: u32, len: u32) {
        let n = self.len();
        if len == n {
            self.set_single(i);
            return;
        }
        let b1 = (a + len) % n;
        let g = self.governing(a);
        let gb = self.governing(b1);
        let q_star = self.triples[gb as usize].q;
        let gt = self.triples[g as usize];
        let p_star = if gt.x == a { gt.p } else { gt.q };

        let alive = self.tx.len();
        let mut deleted = Vec::new();
        let mut t = if gt.x == a { g } else { gt.next };
        for _ in 0..alive {
            if self.dist_cw(a, self.triples[t as usize].x) < len {
                deleted.push(t);
                t = self.triples[t as usize].next;
            } else {
                break;
            }
        }
        let survivors = alive - deleted.len();
        let before = match deleted.first() {
            Some(&d) => self.triples[d as usize].prev,
            None => g,
        };
        let mut touched = Vec::with_capacity(deleted.len());
        for &d in &deleted {
            let dt = self.triples[d as usize];
            self.c.tree_ops += 1;
            self.tx.remove(&dt.x);
            self.segs[dt.q as usize] -= 1;
            touched.push(dt.q);
        }

        let ai = self.new_triple(Triple { x: a, p: p_star, q: i, prev: NIL, next: NIL });
        self.c.tree_ops += 1;
        self.tx.insert(a, ai);
        self.segs[i as usize] += 1;
        self.start[i as usize] = ai;

        let bi = if survivors > 0 && self.triples[t as usize].x == b1 {
            self.triples[t as usize].p = i;
            t
        } else {
            let nb = self.new_triple(Triple { x: b1, p: i, q: q_star, prev: NIL, next: NIL });
            self.c.tree_ops += 1;
            self.tx.insert(b1, nb);
            self.segs[q_star as usize] += 1;
            nb
        };
        self.start[q_star as usize] = bi;

        if survivors == 0 {
            self.link(ai, bi);
            self.link(bi, ai);
        } else {
            self.link(before, ai);
            self.link(ai, bi);
            if bi != t {
                self.link(bi, t);
            }
        }

        for o in touched {
            if self.segs[o as usize] == 0 {
                self.c.tree_ops += 1;
                self.ta.remove(&self.alpha[o as usize]);
                self.start[o as usize] = NIL;
            } else if !self.is_start(o, self.start[o as usize]) {
                self.start[o as usize] = self.find_start(o);
            }
        }
        self.c.tree_ops += 1;
        self.ta.insert(self.alpha[i as usize], i);
    }

    fn link(&mut self, a: u32, b: u32) {
        self.triples[a as usize].next = b;
        self.triples[b as usize].prev = a;
    }

    fn is_start(&self, o: u32, t: u32) -> bool {
        if t == NIL {
            return false;
        }
        let tr = self.triples[t as usize];
        tr.q == o && self.tx.get(&tr.x) == Some(&t)
    }

    fn find_start(&self, o: u32) -> u32 {
        for x in self.tx.keys() {
            let t = *self.tx.get(&x).expect("key just listed");
            if self.triples[t as usize].q == o {
                return t;
            }
        }
        NIL
    }

    /// Owner of every position.
    fn owners(&mut self) -> Vec<u32> {
        let n = self.len();
        match self.mode {
            Mode::Empty => vec![NIL; n as usize],
            Mode::Single(s) => vec![s; n as usize],
            Mode::Frontier => (0..n)
                .map(|p| {
                    let g = self.governing(p);
                    self.triples[g as usize].q
                })
                .collect(),
        }
    }
}

pub fn convex_update(
    problem: &VertexLocalProblem,
    f: &AngleCostFunction,
    counters: &mut OpCounters,
) -> Result<Vec<Assignment>> {
    if !matches!(f, AngleCostFunction::Convex { .. }) {
        return Err(Error::InvalidParameter {
            field: "kernel",
            reason: format!("convex update needs a convex angle cost, got {}", f.kind()),
        });
    }
    let (k, l) = (problem.k(), problem.l());
    let mut out = vec![Assignment::NONE; l];
    if k == 0 || l == 0 {
        return Ok(out);
    }
    let mut c = OpCounters::default();
    // distinct outgoing angles in increasing order, with their edges
    let mut idx: Vec<u32> = (0..l as u32).collect();
    let mut cmp = 0u64;
    idx.sort_by(|&a, &b| {
        cmp += 1;
        problem.out_angle[a as usize].total_cmp(&problem.out_angle[b as usize])
    });
    c.comparisons += cmp;
    let mut keys: Vec<f64> = Vec::new();
    let mut bucket_of = vec![0u32; l];
    for &j in &idx {
        let b = problem.out_angle[j as usize];
        if keys.last() != Some(&b) {
            keys.push(b);
        }
        bucket_of[j as usize] = (keys.len() - 1) as u32;
    }
    let order = sorted_by_distance(&problem.in_dist, &mut c);

    let mut kernel = Kernel {
        f,
        dist: &problem.in_dist,
        alpha: &problem.in_angle,
        keys,
        c,
        mode: Mode::Empty,
        triples: Vec::new(),
        tx: AvlTree::new(),
        ta: AvlTree::new(),
        start: vec![NIL; k],
        segs: vec![0; k],
    };
    for &i in &order {
        if !problem.in_dist[i].is_finite() {
            break;
        }
        kernel.insert(i as u32);
    }
    let owners = kernel.owners();
    let mut value = vec![f64::INFINITY; owners.len()];
    for (pos, &o) in owners.iter().enumerate() {
        if o != NIL {
            value[pos] = kernel.eval(o, pos as u32);
        }
    }
    for j in 0..l {
        let pos = bucket_of[j] as usize;
        let o = owners[pos];
        if o != NIL {
            out[j] = Assignment {
                dist: value[pos],
                pred: Some(o as usize),
            };
        }
    }
    kernel.c.comparisons += kernel.tx.comparisons() + kernel.ta.comparisons();
    *counters += kernel.c;
    Ok(out)
}
