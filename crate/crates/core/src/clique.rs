//! Exact maximum clique by branch and bound with greedy colouring bounds.
//!
//! Vertices are renumbered in degeneracy order. When the ambient rayon pool
//! has more than one thread, the root branches run in parallel and share
//! only the incumbent size; the optimum does not depend on the schedule,
//! the witness and node count may.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn and_not_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
    }

    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueResult {
    /// Original vertex ids, ascending.
    pub clique: Vec<usize>,
    pub nodes: u64,
    /// False when the node budget ran out; the clique is then a lower bound.
    pub complete: bool,
}

/// An undirected graph for clique search.
pub struct Graph {
    n: usize,
    adj: Vec<Vec<bool>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            adj: vec![vec![false; n]; n],
        }
    }

    /// Builds the graph on `0..n` with an edge wherever `edge(i, j)`, `i < j`.
    pub fn from_fn<F: Fn(usize, usize) -> bool + Sync>(n: usize, edge: F) -> Self {
        let rows: Vec<Vec<bool>> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| i != j && edge(i.min(j), i.max(j))).collect())
            .collect();
        Self { n, adj: rows }
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a][b] = true;
            self.adj[b][a] = true;
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Smallest-last order, reversed: the densest core comes first.
    fn degeneracy_order(&self) -> Vec<usize> {
        let mut deg: Vec<usize> = self.adj.iter().map(|r| r.iter().filter(|&&e| e).count()).collect();
        let mut removed = vec![false; self.n];
        let mut order = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let v = (0..self.n)
                .filter(|&v| !removed[v])
                .min_by_key(|&v| (deg[v], v))
                .expect("vertices remain");
            removed[v] = true;
            order.push(v);
            for u in 0..self.n {
                if self.adj[v][u] && !removed[u] {
                    deg[u] -= 1;
                }
            }
        }
        order.reverse();
        order
    }

    pub fn max_clique(&self, budget: u64) -> CliqueResult {
        if self.n == 0 {
            return CliqueResult {
                clique: Vec::new(),
                nodes: 0,
                complete: true,
            };
        }
        let order = self.degeneracy_order();
        let adj: Vec<Bits> = order
            .iter()
            .map(|&v| {
                let mut b = Bits::new(self.n);
                for (j, &u) in order.iter().enumerate() {
                    if self.adj[v][u] {
                        b.set(j);
                    }
                }
                b
            })
            .collect();
        let search = Search {
            adj,
            best: AtomicUsize::new(0),
            incumbent: Mutex::new(Vec::new()),
            nodes: AtomicU64::new(0),
            budget,
            aborted: AtomicBool::new(false),
        };
        let mut all = Bits::new(self.n);
        for i in 0..self.n {
            all.set(i);
        }
        search.root(all);
        let mut clique: Vec<usize> = search
            .incumbent
            .into_inner()
            .expect("no poisoned lock")
            .into_iter()
            .map(|i| order[i])
            .collect();
        clique.sort_unstable();
        CliqueResult {
            clique,
            nodes: search.nodes.into_inner(),
            complete: !search.aborted.into_inner(),
        }
    }
}

struct Search {
    adj: Vec<Bits>,
    best: AtomicUsize,
    incumbent: Mutex<Vec<usize>>,
    nodes: AtomicU64,
    budget: u64,
    aborted: AtomicBool,
}

impl Search {
    /// Greedy sequential colouring; vertices come back grouped by colour,
    /// colours ascending.
    fn colour_sort(&self, p: &Bits) -> (Vec<usize>, Vec<usize>) {
        let mut uncoloured = p.clone();
        let mut order = Vec::new();
        let mut colours = Vec::new();
        let mut colour = 0;
        while !uncoloured.is_empty() {
            colour += 1;
            let mut q = uncoloured.clone();
            while let Some(v) = q.first() {
                uncoloured.clear(v);
                q.clear(v);
                q.and_not_assign(&self.adj[v]);
                order.push(v);
                colours.push(colour);
            }
        }
        (order, colours)
    }

    fn offer(&self, clique: &[usize]) {
        if clique.len() <= self.best.load(Ordering::Relaxed) {
            return;
        }
        let mut inc = self.incumbent.lock().expect("no poisoned lock");
        if clique.len() > inc.len() {
            *inc = clique.to_vec();
            self.best.store(clique.len(), Ordering::Relaxed);
        }
    }

    fn tick(&self) -> bool {
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.budget {
            self.aborted.store(true, Ordering::Relaxed);
        }
        !self.aborted.load(Ordering::Relaxed)
    }

    fn root(&self, p: Bits) {
        if !self.tick() {
            return;
        }
        let (order, colours) = self.colour_sort(&p);
        let branch = |idx: usize| {
            if colours[idx] <= self.best.load(Ordering::Relaxed) {
                return;
            }
            let v = order[idx];
            let mut rest = Bits::new(self.adj.len());
            for &u in &order[..idx] {
                rest.set(u);
            }
            let mut clique = vec![v];
            let next = rest.and(&self.adj[v]);
            if next.is_empty() {
                self.offer(&clique);
            } else {
                self.expand(&mut clique, next);
            }
        };
        if rayon::current_num_threads() > 1 {
            (0..order.len()).into_par_iter().rev().for_each(branch);
        } else {
            (0..order.len()).rev().for_each(branch);
        }
    }

    fn expand(&self, clique: &mut Vec<usize>, mut p: Bits) {
        if !self.tick() {
            return;
        }
        let (order, colours) = self.colour_sort(&p);
        for idx in (0..order.len()).rev() {
            if clique.len() + colours[idx] <= self.best.load(Ordering::Relaxed) {
                return;
            }
            if self.aborted.load(Ordering::Relaxed) {
                return;
            }
            let v = order[idx];
            clique.push(v);
            let next = p.and(&self.adj[v]);
            if next.is_empty() {
                self.offer(clique);
            } else {
                self.expand(clique, next);
            }
            clique.pop();
            p.clear(v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_clique(n: usize, edges: &[(usize, usize)]) -> usize {
        let adj = |a: usize, b: usize| edges.contains(&(a.min(b), a.max(b)));
        (0u32..1 << n)
            .filter(|&s| {
                let vs: Vec<usize> = (0..n).filter(|i| s >> i & 1 == 1).collect();
                vs.iter().enumerate().all(|(i, &a)| vs[i + 1..].iter().all(|&b| adj(a, b)))
            })
            .map(|s| s.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn small_graphs() {
        let g = Graph::new(0);
        assert_eq!(g.max_clique(10).clique, Vec::<usize>::new());
        let mut g = Graph::new(5);
        for (a, b) in [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)] {
            g.add_edge(a, b);
        }
        let r = g.max_clique(1000);
        assert_eq!(r.clique, vec![0, 1, 2]);
        assert!(r.complete);
        let iso = Graph::new(3);
        assert_eq!(iso.max_clique(1000).clique.len(), 1);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let g = Graph::from_fn(40, |a, b| (a + b) % 3 != 0);
        let r = g.max_clique(2);
        assert!(!r.complete);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn agrees_with_brute_force(n in 1usize..=12, bits in any::<u128>()) {
            let mut edges = Vec::new();
            let mut k = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if bits >> (k % 128) & 1 == 1 {
                        edges.push((a, b));
                    }
                    k += 1;
                }
            }
            let g = Graph::from_fn(n, |a, b| edges.contains(&(a, b)));
            let r = g.max_clique(u64::MAX);
            prop_assert_eq!(r.clique.len(), brute_clique(n, &edges));
            for (i, &a) in r.clique.iter().enumerate() {
                for &b in &r.clique[i + 1..] {
                    prop_assert!(edges.contains(&(a, b)));
                }
            }
            let par = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap()
                .install(|| g.max_clique(u64::MAX));
            prop_assert_eq!(par.clique.len(), r.clique.len());
        }
    }
}
