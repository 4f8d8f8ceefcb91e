//! Top-down deterministic domain automata: reduction, membership, minimal
//! witnesses and bounded tree enumeration.

use std::collections::BTreeMap;

use crate::tree::{SymbolId, Tree};
use crate::Error;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct DtaStateId(pub usize);

/// A DTA with a partial transition function; `delta(h, f)` lists one state
/// per child of `f`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Dta {
    names: Vec<String>,
    start: DtaStateId,
    delta: BTreeMap<(DtaStateId, SymbolId), Vec<DtaStateId>>,
}

impl Dta {
    pub fn new(
        names: Vec<String>,
        start: DtaStateId,
        delta: BTreeMap<(DtaStateId, SymbolId), Vec<DtaStateId>>,
    ) -> Result<Dta, Error> {
        if start.0 >= names.len() {
            return Err(Error::Invalid("dta start state out of range".into()));
        }
        for ((h, _), hs) in &delta {
            if h.0 >= names.len() || hs.iter().any(|t| t.0 >= names.len()) {
                return Err(Error::Invalid("dta transition state out of range".into()));
            }
        }
        Ok(Dta {
            names,
            start,
            delta,
        })
    }

    pub fn start(&self) -> DtaStateId {
        self.start
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn state_name(&self, h: DtaStateId) -> &str {
        &self.names[h.0]
    }

    pub fn lookup_state(&self, name: &str) -> Option<DtaStateId> {
        self.names.iter().position(|n| n == name).map(DtaStateId)
    }

    pub fn delta(&self, h: DtaStateId, f: SymbolId) -> Option<&[DtaStateId]> {
        self.delta.get(&(h, f)).map(|v| v.as_slice())
    }

    pub fn transitions(
        &self,
    ) -> impl Iterator<Item = (DtaStateId, SymbolId, &[DtaStateId])> {
        self.delta.iter().map(|(&(h, f), hs)| (h, f, hs.as_slice()))
    }

    /// States with a non-empty domain, as a bitset indexed by state id.
    fn nonempty_states(&self) -> Vec<bool> {
        let mut nonempty = vec![false; self.names.len()];
        loop {
            let mut changed = false;
            for ((h, _), hs) in &self.delta {
                if !nonempty[h.0] && hs.iter().all(|t| nonempty[t.0]) {
                    nonempty[h.0] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        nonempty
    }

    /// Removes states with empty domains and states unreachable from the
    /// start state. Returns `None` when the language itself is empty.
    pub fn reduce(&self) -> Option<Dta> {
        let nonempty = self.nonempty_states();
        if !nonempty[self.start.0] {
            return None;
        }
        // reachability using only transitions into nonempty states
        let mut reach = vec![false; self.names.len()];
        reach[self.start.0] = true;
        let mut queue = vec![self.start];
        while let Some(h) = queue.pop() {
            for ((src, _), hs) in &self.delta {
                if *src != h || !hs.iter().all(|t| nonempty[t.0]) {
                    continue;
                }
                for &t in hs {
                    if !reach[t.0] {
                        reach[t.0] = true;
                        queue.push(t);
                    }
                }
            }
        }
        let keep: Vec<usize> = (0..self.names.len())
            .filter(|&i| nonempty[i] && reach[i])
            .collect();
        let remap: BTreeMap<usize, usize> = keep
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect();
        let mut delta = BTreeMap::new();
        for (&(h, f), hs) in &self.delta {
            if !remap.contains_key(&h.0) || hs.iter().any(|t| !remap.contains_key(&t.0)) {
                continue;
            }
            delta.insert(
                (DtaStateId(remap[&h.0]), f),
                hs.iter().map(|t| DtaStateId(remap[&t.0])).collect(),
            );
        }
        Some(Dta {
            names: keep.iter().map(|&i| self.names[i].clone()).collect(),
            start: DtaStateId(remap[&self.start.0]),
            delta,
        })
    }

    pub fn dom_member(&self, h: DtaStateId, t: &Tree) -> bool {
        match self.delta(h, t.symbol) {
            None => false,
            Some(hs) => {
                hs.len() == t.children.len()
                    && hs
                        .iter()
                        .zip(&t.children)
                        .all(|(&hi, ti)| self.dom_member(hi, ti))
            }
        }
    }

    /// Minimal-depth domain depths per state; `usize::MAX` marks empty domains.
    fn min_depths(&self) -> Vec<usize> {
        let mut depth = vec![usize::MAX; self.names.len()];
        loop {
            let mut changed = false;
            for ((h, _), hs) in &self.delta {
                let worst = hs.iter().map(|t| depth[t.0]).max().unwrap_or(0);
                if worst == usize::MAX {
                    continue;
                }
                let cand = worst.saturating_add(if hs.is_empty() { 0 } else { 1 });
                if cand < depth[h.0] {
                    depth[h.0] = cand;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        depth
    }

    /// A minimal-depth tree in `dom(h)`, symbols tie-broken by declaration
    /// order so witnesses are reproducible.
    pub fn min_tree(&self, h: DtaStateId) -> Result<Tree, Error> {
        let depth = self.min_depths();
        self.min_tree_from(h, &depth)
    }

    fn min_tree_from(&self, h: DtaStateId, depth: &[usize]) -> Result<Tree, Error> {
        if depth[h.0] == usize::MAX {
            return Err(Error::EmptyDom(self.names[h.0].clone()));
        }
        let mut best: Option<(usize, SymbolId, &Vec<DtaStateId>)> = None;
        for (&(src, f), hs) in &self.delta {
            if src != h || hs.iter().any(|t| depth[t.0] == usize::MAX) {
                continue;
            }
            let d = hs
                .iter()
                .map(|t| depth[t.0] + 1)
                .max()
                .unwrap_or(0);
            if best.as_ref().map(|&(bd, _, _)| d < bd).unwrap_or(true) {
                best = Some((d, f, hs));
            }
        }
        let (_, f, hs) = best.ok_or_else(|| Error::EmptyDom(self.names[h.0].clone()))?;
        let children = hs
            .iter()
            .map(|&t| self.min_tree_from(t, depth))
            .collect::<Result<_, _>>()?;
        Ok(Tree { symbol: f, children })
    }

    /// Exactly the trees of `dom(h)` with depth strictly below `max_depth`,
    /// in deterministic order (symbol declaration order, then children
    /// left-to-right).
    pub fn enum_trees(&self, h: DtaStateId, max_depth: usize) -> Vec<Tree> {
        if max_depth == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for (&(src, f), hs) in &self.delta {
            if src != h {
                continue;
            }
            let child_sets: Vec<Vec<Tree>> = hs
                .iter()
                .map(|&t| self.enum_trees(t, max_depth - 1))
                .collect();
            if child_sets.iter().any(|s| s.is_empty()) && !child_sets.is_empty() {
                continue;
            }
            let mut combos = vec![Vec::new()];
            for set in &child_sets {
                let mut next = Vec::with_capacity(combos.len() * set.len());
                for combo in &combos {
                    for t in set {
                        let mut c = combo.clone();
                        c.push(t.clone());
                        next.push(c);
                    }
                }
                combos = next;
            }
            for children in combos {
                out.push(Tree { symbol: f, children });
            }
        }
        out
    }

    /// Number of trees `enum_trees(h, max_depth)` would produce, saturating.
    pub fn count_trees(&self, h: DtaStateId, max_depth: usize) -> u64 {
        let mut prev = vec![0u64; self.names.len()];
        for _ in 0..max_depth {
            let mut cur = vec![0u64; self.names.len()];
            for ((src, _), hs) in &self.delta {
                let prod = hs
                    .iter()
                    .fold(1u64, |acc, t| acc.saturating_mul(prev[t.0]));
                cur[src.0] = cur[src.0].saturating_add(prod);
            }
            prev = cur;
        }
        prev[h.0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmt::parse_dta;
    use crate::tree::RankedAlphabet;

    fn sigma() -> RankedAlphabet {
        RankedAlphabet::new(vec![("f".into(), 2), ("g".into(), 1), ("k".into(), 0)]).unwrap()
    }

    fn example_b() -> Dta {
        let src = "dta start h0\ndelta h0 f -> h1 h1\ndelta h1 g -> h1\ndelta h1 k ->\n";
        parse_dta(src, &sigma(), "test").unwrap()
    }

    #[test]
    fn reduce_keeps_running_example_unchanged() {
        let b = example_b();
        let r = b.reduce().unwrap();
        assert_eq!(r, b);
    }

    #[test]
    fn reduce_drops_state_without_nullary_path() {
        let a = sigma();
        // h2 can only loop through g, so dom(h2) is empty
        let src = "dta start h0\ndelta h0 f -> h1 h2\ndelta h1 k ->\ndelta h2 g -> h2\ndelta h0 k ->\n";
        let b = parse_dta(src, &a, "test").unwrap();
        let r = b.reduce().unwrap();
        assert_eq!(r.num_states(), 1);
        assert!(r.lookup_state("h2").is_none());
        // the f transition dies with h2, leaving only h0 -k->
        assert_eq!(r.transitions().count(), 1);
    }

    #[test]
    fn reduce_reports_empty_language() {
        let a = sigma();
        let src = "dta start h0\ndelta h0 g -> h0\n";
        let b = parse_dta(src, &a, "test").unwrap();
        assert!(b.reduce().is_none());
    }

    #[test]
    fn dom_membership_examples() {
        let a = sigma();
        let b = example_b();
        let h0 = b.start();
        let h1 = b.lookup_state("h1").unwrap();
        assert!(b.dom_member(h0, &Tree::parse("f(k,k)", &a).unwrap()));
        assert!(!b.dom_member(h0, &Tree::parse("g(k)", &a).unwrap()));
        assert!(b.dom_member(h1, &Tree::parse("k", &a).unwrap()));
    }

    #[test]
    fn min_tree_examples() {
        let a = sigma();
        let b = example_b();
        let h1 = b.lookup_state("h1").unwrap();
        assert_eq!(b.min_tree(h1).unwrap(), Tree::parse("k", &a).unwrap());
        assert_eq!(
            b.min_tree(b.start()).unwrap(),
            Tree::parse("f(k,k)", &a).unwrap()
        );
    }

    #[test]
    fn enum_trees_examples() {
        let a = sigma();
        let b = example_b();
        let h1 = b.lookup_state("h1").unwrap();
        let t = |s: &str| Tree::parse(s, &a).unwrap();
        assert_eq!(b.enum_trees(h1, 2), vec![t("g(k)"), t("k")]);
        assert!(b.enum_trees(b.start(), 1).is_empty());
        assert_eq!(b.enum_trees(b.start(), 2), vec![t("f(k,k)")]);
    }

    #[test]
    fn enum_trees_is_monotone_and_in_domain() {
        let b = example_b();
        for h in [b.start(), b.lookup_state("h1").unwrap()] {
            for d in 0..4 {
                let smaller = b.enum_trees(h, d);
                let larger = b.enum_trees(h, d + 1);
                for t in &smaller {
                    assert!(larger.contains(t));
                    assert!(b.dom_member(h, t));
                    assert!(t.depth() < d);
                }
                assert_eq!(smaller.len() as u64, b.count_trees(h, d));
            }
        }
    }
}
