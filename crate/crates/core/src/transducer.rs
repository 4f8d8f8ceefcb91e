//! Deterministic linear tree transducers with output in a free group.

use std::collections::VecDeque;

use crate::dta::{Dta, DtaStateId};
use crate::group::{GroupWord, OutputAlphabet};
use crate::tree::{RankedAlphabet, SymbolId, Tree};
use crate::Error;

/// Index of a transducer state, in declaration order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct StateId(pub usize);

/// One call `q(x_child)` followed by the constant word written after it.
/// `child` is 1-based, matching the surface syntax `q:2`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Call {
    pub state: StateId,
    pub child: usize,
    pub suffix: GroupWord,
}

/// Right-hand side of a rule: either undefined, or a word
/// `lead q1(x_i1) u1 q2(x_i2) u2 ...` where `uj` is the suffix of call `j`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Rhs {
    Bottom,
    Expr { lead: GroupWord, calls: Vec<Call> },
}

impl Rhs {
    pub fn expr(lead: GroupWord, calls: Vec<Call>) -> Rhs {
        Rhs::Expr { lead, calls }
    }

    pub fn constant(lead: GroupWord) -> Rhs {
        Rhs::Expr {
            lead,
            calls: Vec::new(),
        }
    }
}

/// The start expression: either a constant word, or a single call on the
/// whole input wrapped in constant words.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Axiom {
    Constant(GroupWord),
    Wrapped {
        prefix: GroupWord,
        state: StateId,
        suffix: GroupWord,
    },
}

/// A total, deterministic, linear transducer. Every (state, symbol) pair
/// carries exactly one rule; `Bottom` marks inputs outside the domain.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Transducer {
    input: RankedAlphabet,
    output: OutputAlphabet,
    state_names: Vec<String>,
    axiom: Axiom,
    // rules[q][f]
    rules: Vec<Vec<Rhs>>,
}

const EVAL_DEPTH_LIMIT: usize = 100_000;

impl Transducer {
    pub fn new(
        input: RankedAlphabet,
        output: OutputAlphabet,
        state_names: Vec<String>,
        axiom: Axiom,
        rules: Vec<Vec<Rhs>>,
    ) -> Result<Transducer, Error> {
        let n = state_names.len();
        for (i, name) in state_names.iter().enumerate() {
            if name.is_empty() || state_names[..i].contains(name) {
                return Err(Error::Invalid(format!("bad or duplicate state '{name}'")));
            }
        }
        if let Axiom::Wrapped { state, .. } = axiom {
            if state.0 >= n {
                return Err(Error::Invalid("axiom state out of range".into()));
            }
        }
        if rules.len() != n {
            return Err(Error::Invalid("one rule row required per state".into()));
        }
        for (q, row) in rules.iter().enumerate() {
            if row.len() != input.len() {
                return Err(Error::Invalid(format!(
                    "state '{}' must have one rule per input symbol",
                    state_names[q]
                )));
            }
            for (f, rhs) in row.iter().enumerate() {
                let rank = input.rank(SymbolId(f));
                if let Rhs::Expr { calls, .. } = rhs {
                    let mut used = vec![false; rank];
                    for call in calls {
                        if call.state.0 >= n {
                            return Err(Error::Invalid("call state out of range".into()));
                        }
                        if call.child == 0 || call.child > rank {
                            return Err(Error::Invalid(format!(
                                "call child x{} out of range for rank {rank}",
                                call.child
                            )));
                        }
                        if used[call.child - 1] {
                            return Err(Error::Invalid(format!(
                                "child x{} used twice; transducer must be linear",
                                call.child
                            )));
                        }
                        used[call.child - 1] = true;
                    }
                }
            }
        }
        Ok(Transducer {
            input,
            output,
            state_names,
            axiom,
            rules,
        })
    }

    pub fn input(&self) -> &RankedAlphabet {
        &self.input
    }

    pub fn output(&self) -> &OutputAlphabet {
        &self.output
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.state_names[q.0]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn lookup_state(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name).map(StateId)
    }

    pub fn axiom(&self) -> &Axiom {
        &self.axiom
    }

    pub fn rule(&self, q: StateId, f: SymbolId) -> &Rhs {
        &self.rules[q.0][f.0]
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.state_names.len()).map(StateId)
    }

    /// Replaces one rule, keeping all validity checks.
    pub fn with_rule(&self, q: StateId, f: SymbolId, rhs: Rhs) -> Result<Transducer, Error> {
        let mut rules = self.rules.clone();
        rules[q.0][f.0] = rhs;
        Transducer::new(
            self.input.clone(),
            self.output.clone(),
            self.state_names.clone(),
            self.axiom.clone(),
            rules,
        )
    }

    pub fn with_axiom(&self, axiom: Axiom) -> Result<Transducer, Error> {
        Transducer::new(
            self.input.clone(),
            self.output.clone(),
            self.state_names.clone(),
            axiom,
            self.rules.clone(),
        )
    }

    /// The output word for `t`, starting from the axiom.
    pub fn eval(&self, t: &Tree) -> Result<GroupWord, Error> {
        match &self.axiom {
            Axiom::Constant(u) => Ok(u.clone()),
            Axiom::Wrapped {
                prefix,
                state,
                suffix,
            } => {
                let mid = self.eval_state(*state, t, 0)?;
                Ok(prefix.concat(&mid).concat(suffix))
            }
        }
    }

    /// The output of state `q` on `t`; errors with [`Error::OffDomain`] when
    /// a `Bottom` rule is hit.
    pub fn eval_state(&self, q: StateId, t: &Tree, depth: usize) -> Result<GroupWord, Error> {
        if depth > EVAL_DEPTH_LIMIT {
            return Err(Error::EvalDepth);
        }
        match self.rule(q, t.symbol) {
            Rhs::Bottom => Err(Error::OffDomain(t.display(&self.input).to_string())),
            Rhs::Expr { lead, calls } => {
                let mut out = lead.clone();
                for call in calls {
                    let sub = self.eval_state(call.state, &t.children[call.child - 1], depth + 1)?;
                    out = out.concat(&sub).concat(&call.suffix);
                }
                Ok(out)
            }
        }
    }
}

/// Assignment of one domain-automaton state to every transducer state.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CompatibleMap {
    map: Vec<DtaStateId>,
}

impl CompatibleMap {
    pub fn new(map: Vec<DtaStateId>) -> CompatibleMap {
        CompatibleMap { map }
    }

    pub fn get(&self, q: StateId) -> DtaStateId {
        self.map[q.0]
    }

    pub fn as_slice(&self) -> &[DtaStateId] {
        &self.map
    }
}

/// Checks the compatibility conditions of `iota` between `m` and `b`:
/// the axiom state maps to the start state, a rule is `Bottom` exactly when
/// the corresponding domain transition is undefined, and every call's state
/// maps to the domain state of the child it reads.
pub fn check_compatible(m: &Transducer, b: &Dta, iota: &CompatibleMap) -> Result<(), Error> {
    if iota.map.len() != m.num_states() {
        return Err(Error::Incompatible("map has the wrong arity".into()));
    }
    if iota.map.iter().any(|h| h.0 >= b.num_states()) {
        return Err(Error::Incompatible("map targets an unknown state".into()));
    }
    if let Axiom::Wrapped { state, .. } = m.axiom() {
        if iota.get(*state) != b.start() {
            return Err(Error::Incompatible(format!(
                "axiom state '{}' does not map to the start state",
                m.state_name(*state)
            )));
        }
    }
    for q in m.states() {
        for f in m.input().symbols() {
            let rhs = m.rule(q, f);
            match (b.delta(iota.get(q), f), rhs) {
                (None, Rhs::Bottom) => {}
                (None, Rhs::Expr { .. }) => {
                    return Err(Error::Incompatible(format!(
                        "state '{}' has a rule for '{}' outside the domain",
                        m.state_name(q),
                        m.input().name(f)
                    )))
                }
                (Some(_), Rhs::Bottom) => {
                    return Err(Error::Incompatible(format!(
                        "state '{}' is bottom on '{}' inside the domain",
                        m.state_name(q),
                        m.input().name(f)
                    )))
                }
                (Some(hs), Rhs::Expr { calls, .. }) => {
                    for call in calls {
                        if iota.get(call.state) != hs[call.child - 1] {
                            return Err(Error::Incompatible(format!(
                                "call {}(x{}) under '{}'/'{}' maps to the wrong domain state",
                                m.state_name(call.state),
                                call.child,
                                m.state_name(q),
                                m.input().name(f)
                            )));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Infers the unique candidate map by propagating the axiom assignment
/// through the rules, then verifies it. Returns `None` when some state never
/// receives an assignment, when propagation conflicts, or when the verified
/// conditions fail.
pub fn infer_compatible(m: &Transducer, b: &Dta) -> Option<CompatibleMap> {
    let mut assign: Vec<Option<DtaStateId>> = vec![None; m.num_states()];
    let mut queue = VecDeque::new();
    if let Axiom::Wrapped { state, .. } = m.axiom() {
        assign[state.0] = Some(b.start());
        queue.push_back(*state);
    }
    while let Some(q) = queue.pop_front() {
        let h = assign[q.0].unwrap();
        for f in m.input().symbols() {
            let (hs, calls) = match (b.delta(h, f), m.rule(q, f)) {
                (Some(hs), Rhs::Expr { calls, .. }) => (hs, calls),
                _ => continue,
            };
            for call in calls {
                let target = hs[call.child - 1];
                match assign[call.state.0] {
                    None => {
                        assign[call.state.0] = Some(target);
                        queue.push_back(call.state);
                    }
                    Some(prev) if prev != target => return None,
                    Some(_) => {}
                }
            }
        }
    }
    let map = assign.into_iter().collect::<Option<Vec<_>>>()?;
    let iota = CompatibleMap::new(map);
    check_compatible(m, b, &iota).ok()?;
    Some(iota)
}
