//! Straight-line-program handles: words built by concatenation and inversion
//! with structure sharing. Equality is decided by memoized expansion with a
//! size limit, behind the same interface a compressed algorithm would use.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::Mutex;

use crate::group::GroupWord;
use crate::Error;

static STORE_IDS: AtomicU64 = AtomicU64::new(0);

/// Default cap on the reduced length of any expanded node.
pub const DEFAULT_EXPAND_LIMIT: usize = 1 << 20;

#[derive(Debug)]
enum Node {
    Literal(GroupWord),
    Concat(usize, usize),
    Inverse(usize),
}

/// A small copyable reference to a node in one [`SlpStore`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct SlpHandle {
    store: u64,
    node: usize,
}

/// Append-only DAG of word-valued nodes. Construction takes `&mut self`;
/// expansion is read-only and may run concurrently, the memo table is behind
/// a mutex so concurrent calls see identical results.
#[derive(Debug)]
pub struct SlpStore {
    id: u64,
    nodes: Vec<Node>,
    // expanded (pre-reduction) lengths, cached at construction time
    raw_len: Vec<u64>,
    memo: Mutex<HashMap<usize, GroupWord>>,
}

impl SlpStore {
    pub fn new() -> SlpStore {
        SlpStore {
            id: STORE_IDS.fetch_add(1, AtomicOrdering::Relaxed),
            nodes: Vec::new(),
            raw_len: Vec::new(),
            memo: Mutex::new(HashMap::new()),
        }
    }

    fn push(&mut self, node: Node, raw_len: u64) -> SlpHandle {
        self.nodes.push(node);
        self.raw_len.push(raw_len);
        SlpHandle {
            store: self.id,
            node: self.nodes.len() - 1,
        }
    }

    fn check(&self, h: SlpHandle) -> Result<usize, Error> {
        if h.store != self.id {
            return Err(Error::SlpStoreMismatch);
        }
        Ok(h.node)
    }

    pub fn make(&mut self, w: GroupWord) -> SlpHandle {
        let len = w.len() as u64;
        self.push(Node::Literal(w), len)
    }

    pub fn concat(&mut self, h1: SlpHandle, h2: SlpHandle) -> Result<SlpHandle, Error> {
        let a = self.check(h1)?;
        let b = self.check(h2)?;
        let len = self.raw_len[a].saturating_add(self.raw_len[b]);
        Ok(self.push(Node::Concat(a, b), len))
    }

    pub fn invert(&mut self, h: SlpHandle) -> Result<SlpHandle, Error> {
        let a = self.check(h)?;
        let len = self.raw_len[a];
        Ok(self.push(Node::Inverse(a), len))
    }

    /// Expanded length before any reduction.
    pub fn raw_len(&self, h: SlpHandle) -> Result<u64, Error> {
        Ok(self.raw_len[self.check(h)?])
    }

    /// The reduced denotation, computed bottom-up with per-node memoization.
    /// Fails if any intermediate reduced form exceeds `limit` letters.
    pub fn expand(&self, h: SlpHandle, limit: usize) -> Result<GroupWord, Error> {
        let root = self.check(h)?;
        // iterative post-order so adversarially deep DAGs cannot blow the stack
        let mut result: HashMap<usize, GroupWord> = HashMap::new();
        let mut stack = vec![(root, false)];
        while let Some((n, ready)) = stack.pop() {
            if result.contains_key(&n) {
                continue;
            }
            if let Some(w) = self.memo.lock().unwrap().get(&n) {
                result.insert(n, w.clone());
                continue;
            }
            if !ready {
                stack.push((n, true));
                match self.nodes[n] {
                    Node::Literal(_) => {}
                    Node::Concat(a, b) => {
                        stack.push((a, false));
                        stack.push((b, false));
                    }
                    Node::Inverse(a) => stack.push((a, false)),
                }
                continue;
            }
            let w = match &self.nodes[n] {
                Node::Literal(w) => w.clone(),
                Node::Concat(a, b) => result[a].concat(&result[b]),
                Node::Inverse(a) => result[a].invert(),
            };
            if w.len() > limit {
                return Err(Error::SlpLimit { node: n, limit });
            }
            self.memo.lock().unwrap().insert(n, w.clone());
            result.insert(n, w);
        }
        Ok(result.remove(&root).unwrap())
    }

    /// True iff the two denotations are equal in the free group.
    pub fn equal(&self, h1: SlpHandle, h2: SlpHandle) -> Result<bool, Error> {
        self.equal_with_limit(h1, h2, DEFAULT_EXPAND_LIMIT)
    }

    pub fn equal_with_limit(
        &self,
        h1: SlpHandle,
        h2: SlpHandle,
        limit: usize,
    ) -> Result<bool, Error> {
        let a = self.check(h1)?;
        let b = self.check(h2)?;
        if a == b {
            return Ok(true);
        }
        let wa = self.expand(h1, limit)?;
        let wb = self.expand(h2, limit)?;
        if wa.len() != wb.len() {
            return Ok(false);
        }
        Ok(wa == wb)
    }
}

impl Default for SlpStore {
    fn default() -> Self {
        SlpStore::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::OutputAlphabet;

    fn w(s: &str) -> GroupWord {
        GroupWord::parse(s, &OutputAlphabet::new(['a', 'b', 'c']).unwrap()).unwrap()
    }

    #[test]
    fn invert_expands() {
        let mut st = SlpStore::new();
        let h = st.make(w("abc-"));
        let i = st.invert(h).unwrap();
        assert_eq!(st.expand(i, 100).unwrap(), w("cb-a-"));
    }

    #[test]
    fn concat_cancels() {
        let mut st = SlpStore::new();
        let h1 = st.make(w("ab"));
        let h2 = st.make(w("b-a-"));
        let c = st.concat(h1, h2).unwrap();
        assert_eq!(st.expand(c, 100).unwrap(), GroupWord::empty());
        assert_eq!(st.raw_len(c).unwrap(), 4);
    }

    #[test]
    fn repeated_concat() {
        let mut st = SlpStore::new();
        let mut h = st.make(w("ab"));
        let lit = st.make(w("ab"));
        for _ in 0..9 {
            h = st.concat(h, lit).unwrap();
        }
        assert_eq!(st.expand(h, 1000).unwrap(), w("ab").pow(10));
    }

    #[test]
    fn balanced_tree_of_copies() {
        let mut st = SlpStore::new();
        let mut h = st.make(w("ab-"));
        for _ in 0..3 {
            h = st.concat(h, h).unwrap();
        }
        assert_eq!(st.expand(h, 100).unwrap(), w("ab-").pow(8));
    }

    #[test]
    fn limit_error_names_node() {
        let mut st = SlpStore::new();
        let h = st.make(w("ab"));
        match st.expand(h, 1) {
            Err(Error::SlpLimit { node, limit: 1 }) => assert_eq!(node, 0),
            other => panic!("expected limit error, got {other:?}"),
        }
    }

    #[test]
    fn equality_examples() {
        let mut st = SlpStore::new();
        let aa = st.make(w("aa"));
        let l = st.make(w("abc-"));
        let r = st.make(w("cb-a"));
        let c = st.concat(l, r).unwrap();
        assert!(st.equal(aa, c).unwrap());

        let e = st.make(GroupWord::empty());
        let a = st.make(w("a"));
        assert!(!st.equal(e, a).unwrap());
    }

    #[test]
    fn cross_store_handles_rejected() {
        let mut st1 = SlpStore::new();
        let mut st2 = SlpStore::new();
        let h1 = st1.make(w("a"));
        let h2 = st2.make(w("a"));
        assert!(matches!(st1.concat(h1, h2), Err(Error::SlpStoreMismatch)));
        assert!(matches!(st1.equal(h1, h2), Err(Error::SlpStoreMismatch)));
    }
}
