//! Text formats for transducers and domain automata.
//!
//! A transducer file:
//!
//! ```text
//! alphabet f:2 g:1 k:0
//! output a b
//! axiom _ q0 _
//! rule q0 f -> _ q1:2 b q2:1 _
//! rule q1 k -> a
//! rule q2 g -> BOTTOM
//! ```
//!
//! Words use one letter per generator with a trailing `-` for inverses and
//! `_` for the empty word. A one-token axiom is a constant. Calls are
//! written `state:child` with 1-based children. `#` starts a comment.
//!
//! A domain automaton file:
//!
//! ```text
//! dta start h0
//! delta h0 f -> h1 h1
//! delta h1 k ->
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::dta::{Dta, DtaStateId};
use crate::group::{GroupWord, OutputAlphabet};
use crate::transducer::{Axiom, Call, Rhs, StateId, Transducer};
use crate::tree::RankedAlphabet;
use crate::Error;

fn err(file: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_string(),
        line,
        msg: msg.into(),
    }
}

/// Meaningful lines with their 1-based numbers; comments and blanks dropped.
fn lines(src: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    src.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = l.split_whitespace().collect();
        if tokens.is_empty() {
            None
        } else {
            Some((i + 1, tokens))
        }
    })
}

struct StateTable {
    names: Vec<String>,
}

impl StateTable {
    fn intern(&mut self, name: &str) -> StateId {
        match self.names.iter().position(|n| n == name) {
            Some(i) => StateId(i),
            None => {
                self.names.push(name.to_string());
                StateId(self.names.len() - 1)
            }
        }
    }
}

fn parse_word(
    token: &str,
    output: &OutputAlphabet,
    file: &str,
    line: usize,
) -> Result<GroupWord, Error> {
    GroupWord::parse(token, output).map_err(|e| err(file, line, e.to_string()))
}

/// Parses the transducer format. `file` labels error messages.
pub fn parse_transducer(src: &str, file: &str) -> Result<Transducer, Error> {
    let mut it = lines(src);

    let (ln, toks) = it
        .next()
        .ok_or_else(|| err(file, 0, "missing alphabet line"))?;
    if toks[0] != "alphabet" {
        return Err(err(file, ln, "expected 'alphabet'"));
    }
    let mut entries = Vec::new();
    for t in &toks[1..] {
        let (name, rank) = t
            .rsplit_once(':')
            .ok_or_else(|| err(file, ln, format!("bad symbol token '{t}'")))?;
        let rank: usize = rank
            .parse()
            .map_err(|_| err(file, ln, format!("bad rank in '{t}'")))?;
        entries.push((name.to_string(), rank));
    }
    let input = RankedAlphabet::new(entries).map_err(|e| err(file, ln, e.to_string()))?;

    let (ln, toks) = it
        .next()
        .ok_or_else(|| err(file, ln, "missing output line"))?;
    if toks[0] != "output" {
        return Err(err(file, ln, "expected 'output'"));
    }
    let mut letters = Vec::new();
    for t in &toks[1..] {
        let mut chars = t.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => letters.push(c),
            _ => return Err(err(file, ln, format!("bad output letter '{t}'"))),
        }
    }
    let output = OutputAlphabet::new(letters).map_err(|e| err(file, ln, e.to_string()))?;

    let (ln, toks) = it
        .next()
        .ok_or_else(|| err(file, ln, "missing axiom line"))?;
    if toks[0] != "axiom" {
        return Err(err(file, ln, "expected 'axiom'"));
    }
    let mut states = StateTable { names: Vec::new() };
    let axiom = match toks.len() {
        2 => Axiom::Constant(parse_word(toks[1], &output, file, ln)?),
        4 => Axiom::Wrapped {
            prefix: parse_word(toks[1], &output, file, ln)?,
            state: states.intern(toks[2]),
            suffix: parse_word(toks[3], &output, file, ln)?,
        },
        _ => {
            return Err(err(
                file,
                ln,
                "axiom takes one word or prefix/state/suffix",
            ))
        }
    };

    let mut parsed: BTreeMap<(StateId, usize), (usize, Rhs)> = BTreeMap::new();
    for (ln, toks) in it {
        if toks[0] != "rule" {
            return Err(err(file, ln, format!("expected 'rule', got '{}'", toks[0])));
        }
        if toks.len() < 5 || toks[3] != "->" {
            return Err(err(file, ln, "rule syntax: rule state symbol -> rhs"));
        }
        let q = states.intern(toks[1]);
        let f = input
            .lookup(toks[2])
            .ok_or_else(|| err(file, ln, format!("unknown input symbol '{}'", toks[2])))?;
        let rank = input.rank(f);
        let rhs = if toks[4..] == ["BOTTOM"] {
            Rhs::Bottom
        } else {
            let body = &toks[4..];
            if body.len() % 2 == 0 {
                return Err(err(
                    file,
                    ln,
                    "rule body must alternate words and calls, starting and ending with a word",
                ));
            }
            let lead = parse_word(body[0], &output, file, ln)?;
            let mut calls = Vec::new();
            for pair in body[1..].chunks(2) {
                let (name, child) = pair[0]
                    .rsplit_once(':')
                    .ok_or_else(|| err(file, ln, format!("bad call token '{}'", pair[0])))?;
                let child: usize = child
                    .parse()
                    .map_err(|_| err(file, ln, format!("bad child index in '{}'", pair[0])))?;
                if child == 0 || child > rank {
                    return Err(err(
                        file,
                        ln,
                        format!("child x{child} out of range for '{}' of rank {rank}", toks[2]),
                    ));
                }
                calls.push(Call {
                    state: states.intern(name),
                    child,
                    suffix: parse_word(pair[1], &output, file, ln)?,
                });
            }
            Rhs::Expr { lead, calls }
        };
        if let Some((prev, _)) = parsed.insert((q, f.0), (ln, rhs)) {
            return Err(err(
                file,
                ln,
                format!(
                    "duplicate rule for '{}' and '{}' (first at line {prev})",
                    toks[1], toks[2]
                ),
            ));
        }
    }

    let n = states.names.len();
    let mut rules: Vec<Vec<Rhs>> = vec![vec![Rhs::Bottom; input.len()]; n];
    let mut missing = Vec::new();
    for q in 0..n {
        for f in input.symbols() {
            match parsed.remove(&(StateId(q), f.0)) {
                Some((_, rhs)) => rules[q][f.0] = rhs,
                None => missing.push(format!("{}/{}", states.names[q], input.name(f))),
            }
        }
    }
    if !missing.is_empty() {
        return Err(err(
            file,
            0,
            format!("missing rules for: {}", missing.join(", ")),
        ));
    }
    Transducer::new(input, output, states.names, axiom, rules)
        .map_err(|e| err(file, 0, e.to_string()))
}

/// Parses the domain automaton format against the transducer's input
/// alphabet.
pub fn parse_dta(src: &str, alphabet: &RankedAlphabet, file: &str) -> Result<Dta, Error> {
    let mut it = lines(src);
    let (ln, toks) = it
        .next()
        .ok_or_else(|| err(file, 0, "missing dta line"))?;
    if toks.len() != 3 || toks[0] != "dta" || toks[1] != "start" {
        return Err(err(file, ln, "expected 'dta start <state>'"));
    }
    let mut states = StateTable { names: Vec::new() };
    let start = states.intern(toks[2]);
    let mut delta: BTreeMap<(DtaStateId, crate::tree::SymbolId), Vec<DtaStateId>> =
        BTreeMap::new();
    for (ln, toks) in it {
        if toks.len() < 4 || toks[0] != "delta" || toks[3] != "->" {
            return Err(err(file, ln, "delta syntax: delta state symbol -> states"));
        }
        let h = states.intern(toks[1]);
        let f = alphabet
            .lookup(toks[2])
            .ok_or_else(|| err(file, ln, format!("unknown input symbol '{}'", toks[2])))?;
        let rank = alphabet.rank(f);
        let hs: Vec<DtaStateId> = toks[4..]
            .iter()
            .map(|t| DtaStateId(states.intern(t).0))
            .collect();
        if hs.len() != rank {
            return Err(err(
                file,
                ln,
                format!("'{}' has rank {rank} but {} successors", toks[2], hs.len()),
            ));
        }
        let key = (DtaStateId(h.0), f);
        if delta.insert(key, hs).is_some() {
            return Err(err(
                file,
                ln,
                format!("duplicate transition for '{}' and '{}'", toks[1], toks[2]),
            ));
        }
    }
    Dta::new(states.names, DtaStateId(start.0), delta).map_err(|e| err(file, 0, e.to_string()))
}

pub fn print_transducer(m: &Transducer) -> String {
    let mut out = String::new();
    out.push_str("alphabet");
    for f in m.input().symbols() {
        let _ = write!(out, " {}:{}", m.input().name(f), m.input().rank(f));
    }
    out.push('\n');
    out.push_str("output");
    for c in m.output().letters() {
        let _ = write!(out, " {c}");
    }
    out.push('\n');
    match m.axiom() {
        Axiom::Constant(u) => {
            let _ = writeln!(out, "axiom {u}");
        }
        Axiom::Wrapped {
            prefix,
            state,
            suffix,
        } => {
            let _ = writeln!(out, "axiom {prefix} {} {suffix}", m.state_name(*state));
        }
    }
    for q in m.states() {
        for f in m.input().symbols() {
            let _ = write!(out, "rule {} {} ->", m.state_name(q), m.input().name(f));
            match m.rule(q, f) {
                Rhs::Bottom => out.push_str(" BOTTOM"),
                Rhs::Expr { lead, calls } => {
                    let _ = write!(out, " {lead}");
                    for call in calls {
                        let _ = write!(
                            out,
                            " {}:{} {}",
                            m.state_name(call.state),
                            call.child,
                            call.suffix
                        );
                    }
                }
            }
            out.push('\n');
        }
    }
    out
}

pub fn print_dta(d: &Dta, alphabet: &RankedAlphabet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dta start {}", d.state_name(d.start()));
    for (h, f, hs) in d.transitions() {
        let _ = write!(out, "delta {} {} ->", d.state_name(h), alphabet.name(f));
        for t in hs {
            let _ = write!(out, " {}", d.state_name(*t));
        }
        out.push('\n');
    }
    out
}
