//! Arena-backed AVL tree with comparison counting.
//!
//! The update kernels need more than `BTreeMap` offers: the closest-pair query
//! with circular wrap-around, guided root-to-leaf descents, and an exact count
//! of key comparisons for the complexity instrumentation.

use std::cell::Cell;
use std::cmp::Ordering;

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node<K, V> {
    key: K,
    val: V,
    left: u32,
    right: u32,
    height: i32,
}

/// Direction chosen at each node of a guided descent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Left,
    Right,
    Stop,
}

#[derive(Debug, Clone)]
pub struct AvlTree<K, V> {
    nodes: Vec<Node<K, V>>,
    free: Vec<u32>,
    root: u32,
    len: usize,
    comparisons: Cell<u64>,
}

impl<K: Copy + PartialOrd, V> Default for AvlTree<K, V> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Copy + PartialOrd, V> AvlTree<K, V> {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            free: Vec::new(),
            root: NIL,
            len: 0,
            comparisons: Cell::new(0),
        }
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            nodes: Vec::with_capacity(n),
            ..Self::new()
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Key comparisons performed so far.
    pub fn comparisons(&self) -> u64 {
        self.comparisons.get()
    }

    #[inline]
    fn cmp(&self, a: &K, b: &K) -> Ordering {
        self.comparisons.set(self.comparisons.get() + 1);
        a.partial_cmp(b).expect("tree keys must be totally ordered")
    }

    #[inline]
    fn h(&self, n: u32) -> i32 {
        if n == NIL {
            0
        } else {
            self.nodes[n as usize].height
        }
    }

    #[inline]
    fn fix(&mut self, n: u32) {
        let l = self.nodes[n as usize].left;
        let r = self.nodes[n as usize].right;
        self.nodes[n as usize].height = 1 + self.h(l).max(self.h(r));
    }

    fn rotate_right(&mut self, n: u32) -> u32 {
        let l = self.nodes[n as usize].left;
        self.nodes[n as usize].left = self.nodes[l as usize].right;
        self.nodes[l as usize].right = n;
        self.fix(n);
        self.fix(l);
        l
    }

    fn rotate_left(&mut self, n: u32) -> u32 {
        let r = self.nodes[n as usize].right;
        self.nodes[n as usize].right = self.nodes[r as usize].left;
        self.nodes[r as usize].left = n;
        self.fix(n);
        self.fix(r);
        r
    }

    fn balance(&mut self, n: u32) -> u32 {
        self.fix(n);
        let (l, r) = (self.nodes[n as usize].left, self.nodes[n as usize].right);
        let bf = self.h(l) - self.h(r);
        if bf > 1 {
            let (ll, lr) = (self.nodes[l as usize].left, self.nodes[l as usize].right);
            if self.h(ll) < self.h(lr) {
                let nl = self.rotate_left(l);
                self.nodes[n as usize].left = nl;
            }
            return self.rotate_right(n);
        }
        if bf < -1 {
            let (rl, rr) = (self.nodes[r as usize].left, self.nodes[r as usize].right);
            if self.h(rr) < self.h(rl) {
                let nr = self.rotate_right(r);
                self.nodes[n as usize].right = nr;
            }
            return self.rotate_left(n);
        }
        n
    }

    fn alloc(&mut self, key: K, val: V) -> u32 {
        let node = Node {
            key,
            val,
            left: NIL,
            right: NIL,
            height: 1,
        };
        if let Some(i) = self.free.pop() {
            self.nodes[i as usize] = node;
            i
        } else {
            self.nodes.push(node);
            (self.nodes.len() - 1) as u32
        }
    }

    /// Inserts `key`; returns the previous value if the key was present.
    pub fn insert(&mut self, key: K, val: V) -> Option<V> {
        let mut slot = Some(val);
        let mut old = None;
        self.root = self.insert_at(self.root, key, &mut slot, &mut old);
        if old.is_none() {
            self.len += 1;
        }
        old
    }

    fn insert_at(&mut self, n: u32, key: K, val: &mut Option<V>, old: &mut Option<V>) -> u32 {
        if n == NIL {
            return self.alloc(key, val.take().expect("value consumed once"));
        }
        match self.cmp(&key, &self.nodes[n as usize].key) {
            Ordering::Less => {
                let l = self.nodes[n as usize].left;
                let nl = self.insert_at(l, key, val, old);
                self.nodes[n as usize].left = nl;
            }
            Ordering::Greater => {
                let r = self.nodes[n as usize].right;
                let nr = self.insert_at(r, key, val, old);
                self.nodes[n as usize].right = nr;
            }
            Ordering::Equal => {
                let v = val.take().expect("value consumed once");
                *old = Some(std::mem::replace(&mut self.nodes[n as usize].val, v));
                return n;
            }
        }
        self.balance(n)
    }

    pub fn remove(&mut self, key: &K) -> Option<V>
    where
        V: Clone,
    {
        let mut out = None;
        self.root = self.remove_at(self.root, key, &mut out);
        if out.is_some() {
            self.len -= 1;
        }
        out
    }

    fn remove_at(&mut self, n: u32, key: &K, out: &mut Option<V>) -> u32
    where
        V: Clone,
    {
        if n == NIL {
            return NIL;
        }
        match self.cmp(key, &self.nodes[n as usize].key) {
            Ordering::Less => {
                let l = self.nodes[n as usize].left;
                let nl = self.remove_at(l, key, out);
                self.nodes[n as usize].left = nl;
            }
            Ordering::Greater => {
                let r = self.nodes[n as usize].right;
                let nr = self.remove_at(r, key, out);
                self.nodes[n as usize].right = nr;
            }
            Ordering::Equal => {
                *out = Some(self.nodes[n as usize].val.clone());
                let (l, r) = (self.nodes[n as usize].left, self.nodes[n as usize].right);
                self.free.push(n);
                if l == NIL {
                    return r;
                }
                if r == NIL {
                    return l;
                }
                let (nr, m) = self.detach_min(r);
                self.nodes[m as usize].left = l;
                self.nodes[m as usize].right = nr;
                return self.balance(m);
            }
        }
        self.balance(n)
    }

    /// Unlinks the minimum of the subtree; returns (new subtree root, min node).
    fn detach_min(&mut self, n: u32) -> (u32, u32) {
        let l = self.nodes[n as usize].left;
        if l == NIL {
            return (self.nodes[n as usize].right, n);
        }
        let (nl, m) = self.detach_min(l);
        self.nodes[n as usize].left = nl;
        (self.balance(n), m)
    }

    pub fn get(&self, key: &K) -> Option<&V> {
        let mut n = self.root;
        while n != NIL {
            let node = &self.nodes[n as usize];
            n = match self.cmp(key, &node.key) {
                Ordering::Less => node.left,
                Ordering::Greater => node.right,
                Ordering::Equal => return Some(&node.val),
            };
        }
        None
    }

    pub fn min(&self) -> Option<(K, &V)> {
        let mut n = self.root;
        if n == NIL {
            return None;
        }
        while self.nodes[n as usize].left != NIL {
            n = self.nodes[n as usize].left;
        }
        let node = &self.nodes[n as usize];
        Some((node.key, &node.val))
    }

    pub fn max(&self) -> Option<(K, &V)> {
        let mut n = self.root;
        if n == NIL {
            return None;
        }
        while self.nodes[n as usize].right != NIL {
            n = self.nodes[n as usize].right;
        }
        let node = &self.nodes[n as usize];
        Some((node.key, &node.val))
    }

    /// Appends every key `k` with `lower <= k <= upper` to `out`, recursing
    /// only into subtrees that can hold such keys.
    pub fn get_inbetween(&self, lower: K, upper: K, out: &mut Vec<K>) {
        self.inbetween_at(self.root, lower, upper, false, false, out);
    }

    /// `lo_ok`/`hi_ok` record that every key below `n` is already known to
    /// satisfy the lower/upper bound, so those comparisons are skipped.
    fn inbetween_at(&self, n: u32, lower: K, upper: K, lo_ok: bool, hi_ok: bool, out: &mut Vec<K>) {
        if n == NIL {
            return;
        }
        let node = &self.nodes[n as usize];
        let ge_lower = lo_ok || self.cmp(&lower, &node.key) != Ordering::Greater;
        let le_upper = hi_ok || self.cmp(&node.key, &upper) != Ordering::Greater;
        if ge_lower {
            self.inbetween_at(node.left, lower, upper, lo_ok, le_upper, out);
        }
        if ge_lower && le_upper {
            out.push(node.key);
        }
        if le_upper {
            self.inbetween_at(node.right, lower, upper, ge_lower, hi_ok, out);
        }
    }

    /// Circular neighbors of `x`: the largest key `< x` and the smallest key
    /// `>= x`. Either side wraps to the opposite end of the tree when empty.
    pub fn find_closest(&self, x: K) -> Option<((K, &V), (K, &V))> {
        if self.root == NIL {
            return None;
        }
        let mut left = NIL;
        let mut right = NIL;
        let mut n = self.root;
        while n != NIL {
            let node = &self.nodes[n as usize];
            if self.cmp(&x, &node.key) == Ordering::Greater {
                left = n;
                n = node.right;
            } else {
                right = n;
                n = node.left;
            }
        }
        let l = if left == NIL {
            self.max().expect("nonempty")
        } else {
            let node = &self.nodes[left as usize];
            (node.key, &node.val)
        };
        let r = if right == NIL {
            self.min().expect("nonempty")
        } else {
            let node = &self.nodes[right as usize];
            (node.key, &node.val)
        };
        Some((l, r))
    }

    /// Walks from the root, letting `f` pick the branch at each node.
    /// Every visited node is passed to `f` once.
    pub fn descend(&self, mut f: impl FnMut(K, &V) -> Step) {
        let mut n = self.root;
        while n != NIL {
            let node = &self.nodes[n as usize];
            n = match f(node.key, &node.val) {
                Step::Left => node.left,
                Step::Right => node.right,
                Step::Stop => return,
            };
        }
    }

    /// In-order keys.
    pub fn keys(&self) -> Vec<K> {
        let mut out = Vec::with_capacity(self.len);
        let mut stack = Vec::new();
        let mut n = self.root;
        while n != NIL || !stack.is_empty() {
            while n != NIL {
                stack.push(n);
                n = self.nodes[n as usize].left;
            }
            let top = stack.pop().expect("nonempty stack");
            out.push(self.nodes[top as usize].key);
            n = self.nodes[top as usize].right;
        }
        out
    }

    #[cfg(test)]
    fn check(&self) -> usize {
        fn go<K: Copy + PartialOrd, V>(t: &AvlTree<K, V>, n: u32, lo: Option<K>, hi: Option<K>) -> i32 {
            if n == NIL {
                return 0;
            }
            let node = &t.nodes[n as usize];
            if let Some(lo) = lo {
                assert!(node.key > lo);
            }
            if let Some(hi) = hi {
                assert!(node.key < hi);
            }
            let hl = go(t, node.left, lo, Some(node.key));
            let hr = go(t, node.right, Some(node.key), hi);
            assert!((hl - hr).abs() <= 1, "unbalanced");
            assert_eq!(node.height, 1 + hl.max(hr));
            node.height
        }
        go(self, self.root, None, None) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tree(keys: &[f64]) -> AvlTree<f64, ()> {
        let mut t = AvlTree::new();
        for &k in keys {
            t.insert(k, ());
        }
        t
    }

    #[test]
    fn inbetween_examples() {
        let t = tree(&[10.0, 20.0, 30.0, 40.0]);
        let mut out = vec![];
        t.get_inbetween(15.0, 35.0, &mut out);
        assert_eq!(out, vec![20.0, 30.0]);
        out.clear();
        t.get_inbetween(41.0, 90.0, &mut out);
        assert!(out.is_empty());
        t.get_inbetween(-5.0, 5.0, &mut out);
        assert!(out.is_empty());
        t.get_inbetween(10.0, 10.0, &mut out);
        assert_eq!(out, vec![10.0]);
    }

    #[test]
    fn closest_examples() {
        let t = tree(&[10.0, 20.0, 30.0]);
        let ((l, _), (r, _)) = t.find_closest(22.0).unwrap();
        assert_eq!((l, r), (20.0, 30.0));
        let ((l, _), (r, _)) = t.find_closest(5.0).unwrap();
        assert_eq!((l, r), (30.0, 10.0));
        let ((l, _), (r, _)) = t.find_closest(35.0).unwrap();
        assert_eq!((l, r), (30.0, 10.0));
        let ((l, _), (r, _)) = t.find_closest(20.0).unwrap();
        assert_eq!((l, r), (10.0, 20.0));
        let s = tree(&[7.0]);
        let ((l, _), (r, _)) = s.find_closest(100.0).unwrap();
        assert_eq!((l, r), (7.0, 7.0));
        assert!(tree(&[]).find_closest(1.0).is_none());
    }

    #[test]
    fn insert_replaces_and_counts_comparisons() {
        let mut t: AvlTree<u32, &str> = AvlTree::new();
        assert_eq!(t.insert(3, "a"), None);
        assert_eq!(t.insert(3, "b"), Some("a"));
        assert_eq!(t.len(), 1);
        assert_eq!(t.get(&3), Some(&"b"));
        assert!(t.comparisons() > 0);
    }

    #[test]
    fn descend_visits_search_path() {
        let t = tree(&(0..31).map(|i| i as f64).collect::<Vec<_>>());
        let mut path = vec![];
        t.descend(|k, _| {
            path.push(k);
            if 12.5 < k {
                Step::Left
            } else {
                Step::Right
            }
        });
        assert!(path.contains(&12.0) && path.contains(&13.0));
        assert!(path.len() <= 6);
    }

    proptest! {
        #[test]
        fn behaves_like_a_sorted_set(ops in proptest::collection::vec((0u32..200, any::<bool>()), 0..400)) {
            let mut t: AvlTree<u32, u32> = AvlTree::new();
            let mut model = std::collections::BTreeSet::new();
            for (k, ins) in ops {
                if ins {
                    t.insert(k, k * 2);
                    model.insert(k);
                } else {
                    prop_assert_eq!(t.remove(&k).is_some(), model.remove(&k));
                }
                prop_assert_eq!(t.len(), model.len());
            }
            t.check();
            prop_assert_eq!(t.keys(), model.iter().copied().collect::<Vec<_>>());
            for x in 0..205u32 {
                let want_lo = model.range(..x).next_back().or(model.iter().next_back()).copied();
                let want_hi = model.range(x..).next().or(model.iter().next()).copied();
                match t.find_closest(x) {
                    None => prop_assert!(model.is_empty()),
                    Some(((l, lv), (r, _))) => {
                        prop_assert_eq!(Some(l), want_lo);
                        prop_assert_eq!(Some(r), want_hi);
                        prop_assert_eq!(*lv, l * 2);
                    }
                }
            }
            let mut out = vec![];
            t.get_inbetween(50, 120, &mut out);
            out.sort();
            prop_assert_eq!(out, model.range(50..=120).copied().collect::<Vec<_>>());
        }

        #[test]
        fn height_is_logarithmic(n in 1usize..2000) {
            let mut t: AvlTree<usize, ()> = AvlTree::new();
            for i in 0..n {
                t.insert(i, ());
            }
            let h = t.check() as f64;
            prop_assert!(h <= 1.45 * ((n + 2) as f64).log2());
        }
    }
}
