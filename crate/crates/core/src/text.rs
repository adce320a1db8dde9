//! Line-oriented text formats for nested automata, monitor-counter automata and lasso words.
//!
//! `;` starts a comment. Indentation is free on input; rendering uses two spaces inside blocks.
//! Slave indexes are 1-based in text and 0-based in memory.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mca::{Instr, Mca};
use crate::model::{Alphabet, Automaton, LassoWord, Letter, Nwa, State, Transition, WeightedAutomaton};
use crate::value::ValueFn;

#[derive(Clone, Debug)]
struct Token<'a> {
    text: &'a str,
    col: usize,
}

#[derive(Clone, Debug)]
struct Line<'a> {
    no: usize,
    raw: &'a str,
    tokens: Vec<Token<'a>>,
}

impl<'a> Line<'a> {
    fn err<T>(&self, col: usize, expected: &str) -> Result<T> {
        Err(Error::Syntax { line: self.no, col, expected: expected.into() })
    }

    fn end_col(&self) -> usize {
        self.raw.chars().count() + 1
    }

    fn tok(&self, i: usize, expected: &str) -> Result<&Token<'a>> {
        match self.tokens.get(i) {
            Some(t) => Ok(t),
            None => self.err(self.end_col(), expected),
        }
    }

    fn finish(&self, n: usize) -> Result<()> {
        match self.tokens.get(n) {
            Some(t) => self.err(t.col, "end of line"),
            None => Ok(()),
        }
    }
}

fn lines(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split(';').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (col, (byte, ch)) in body.char_indices().enumerate() {
            if ch.is_whitespace() {
                if let Some((b, c)) = start.take() {
                    tokens.push(Token { text: &body[b..byte], col: c + 1 });
                }
            } else if start.is_none() {
                start = Some((byte, col));
            }
        }
        if let Some((b, c)) = start {
            tokens.push(Token { text: &body[b..], col: c + 1 });
        }
        if !tokens.is_empty() {
            out.push(Line { no: i + 1, raw: body, tokens });
        }
    }
    out
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Cursor<'a> {
    lines: Vec<Line<'a>>,
    at: usize,
    last_line: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor { lines: lines(text), at: 0, last_line: text.lines().count().max(1) }
    }

    fn peek(&self) -> Option<&Line<'a>> {
        self.lines.get(self.at)
    }

    fn next(&mut self, expected: &str) -> Result<Line<'a>> {
        match self.lines.get(self.at) {
            Some(l) => {
                self.at += 1;
                Ok(l.clone())
            }
            None => Err(Error::Syntax { line: self.last_line, col: 1, expected: expected.into() }),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<Line<'a>> {
        let l = self.next(&format!("`{word}`"))?;
        if l.tokens[0].text != word {
            return l.err(l.tokens[0].col, &format!("`{word}`"));
        }
        Ok(l)
    }
}

fn parse_alphabet(cur: &mut Cursor<'_>) -> Result<Alphabet> {
    let l = cur.keyword("alphabet")?;
    if l.tokens.len() < 2 {
        return l.err(l.end_col(), "at least one letter");
    }
    let mut names: Vec<String> = Vec::new();
    for t in &l.tokens[1..] {
        if !is_ident(t.text) {
            return l.err(t.col, "letter identifier");
        }
        if names.iter().any(|n| n == t.text) {
            return l.err(t.col, "distinct letter");
        }
        names.push(t.text.to_string());
    }
    Alphabet::new(names)
}

/// Body of an automaton block: states, initial, accepting, and transitions in any order after `states`.
struct Block<L> {
    states: Vec<String>,
    initial: Vec<State>,
    accepting: Vec<State>,
    transitions: Vec<Transition<L>>,
}

type LabelParser<'f, L> = dyn FnMut(&Line<'_>, usize) -> Result<(L, usize)> + 'f;

fn parse_block<L>(
    cur: &mut Cursor<'_>,
    alphabet: &Alphabet,
    label: &mut LabelParser<'_, L>,
) -> Result<Block<L>> {
    let l = cur.keyword("states")?;
    let mut states: Vec<String> = Vec::new();
    for t in &l.tokens[1..] {
        if !is_ident(t.text) {
            return l.err(t.col, "state identifier");
        }
        if states.iter().any(|s| s == t.text) {
            return l.err(t.col, "distinct state");
        }
        states.push(t.text.to_string());
    }
    if states.is_empty() {
        return l.err(l.end_col(), "at least one state");
    }
    let state = |l: &Line<'_>, t: &Token<'_>| -> Result<State> {
        match states.iter().position(|s| s == t.text) {
            Some(i) => Ok(i),
            None => l.err(t.col, "declared state"),
        }
    };
    let mut block = Block { states: Vec::new(), initial: Vec::new(), accepting: Vec::new(), transitions: Vec::new() };
    let (mut seen_initial, mut seen_accepting) = (false, false);
    while let Some(line) = cur.peek() {
        let line = line.clone();
        match line.tokens[0].text {
            "initial" if !seen_initial => {
                seen_initial = true;
                for t in &line.tokens[1..] {
                    block.initial.push(state(&line, t)?);
                }
            }
            "accepting" if !seen_accepting => {
                seen_accepting = true;
                for t in &line.tokens[1..] {
                    block.accepting.push(state(&line, t)?);
                }
            }
            "trans" => {
                let from = state(&line, line.tok(1, "source state")?)?;
                let lt = line.tok(2, "letter")?;
                let Some(letter) = alphabet.id(lt.text) else {
                    return line.err(lt.col, "letter of the alphabet");
                };
                let to = state(&line, line.tok(3, "target state")?)?;
                let (lab, used) = label(&line, 4)?;
                line.finish(4 + used)?;
                block.transitions.push(Transition { from, letter, to, label: lab });
            }
            _ => break,
        }
        cur.at += 1;
    }
    block.states = states;
    Ok(block)
}

fn parse_int(l: &Line<'_>, t: &Token<'_>, expected: &str) -> Result<i64> {
    t.text.parse::<i64>().or_else(|_| l.err(t.col, expected))
}

/// Parses the nested-automaton format.
pub fn parse_nwa(text: &str) -> Result<Nwa> {
    let mut cur = Cursor::new(text);
    let h = cur.keyword("nwa")?;
    h.finish(1)?;
    let alphabet = parse_alphabet(&mut cur)?;
    cur.keyword("master")?.finish(1)?;
    let mut invoke = |l: &Line<'_>, i: usize| -> Result<(usize, usize)> {
        let kw = l.tok(i, "`invoke`")?;
        if kw.text != "invoke" {
            return l.err(kw.col, "`invoke`");
        }
        let n = l.tok(i + 1, "slave index")?;
        match n.text.parse::<usize>() {
            Ok(v) if v >= 1 => Ok((v - 1, 2)),
            _ => l.err(n.col, "slave index (1-based)"),
        }
    };
    let mb = parse_block(&mut cur, &alphabet, &mut invoke)?;
    let mut slaves = Vec::new();
    while cur.peek().is_some() {
        let l = cur.keyword("slave")?;
        let idx = l.tok(1, "slave index")?;
        if idx.text != (slaves.len() + 1).to_string() {
            return l.err(idx.col, &format!("slave index {}", slaves.len() + 1));
        }
        let kw = l.tok(2, "`valuefn`")?;
        if kw.text != "valuefn" {
            return l.err(kw.col, "`valuefn`");
        }
        let vt = l.tok(3, "value function")?;
        let value_fn = match vt.text {
            "sum" => ValueFn::Sum,
            "sum+" => ValueFn::SumPlus,
            _ => return l.err(vt.col, "`sum` or `sum+`"),
        };
        l.finish(4)?;
        let mut weight = |l: &Line<'_>, i: usize| -> Result<(i64, usize)> {
            let kw = l.tok(i, "`weight`")?;
            if kw.text != "weight" {
                return l.err(kw.col, "`weight`");
            }
            let w = l.tok(i + 1, "integer weight")?;
            Ok((parse_int(l, w, "integer weight")?, 2))
        };
        let b = parse_block(&mut cur, &alphabet, &mut weight)?;
        let aut = Automaton::new(alphabet.len(), b.states, b.initial, b.accepting, b.transitions)?;
        slaves.push(WeightedAutomaton::new(aut, value_fn)?);
    }
    let master = Automaton::new(alphabet.len(), mb.states, mb.initial, mb.accepting, mb.transitions)?;
    Ok(Nwa::new(alphabet, master, slaves))
}

fn render_block<L>(out: &mut String, alphabet: &Alphabet, a: &Automaton<L>, label: impl Fn(&L) -> String) {
    let names = |v: &[State]| v.iter().map(|&s| format!(" {}", a.state_name(s))).collect::<String>();
    let _ = writeln!(out, "  states{}", names(&(0..a.n_states()).collect::<Vec<_>>()));
    let _ = writeln!(out, "  initial{}", names(a.initial()));
    let _ = writeln!(out, "  accepting{}", names(&a.accepting_states()));
    for t in a.transitions() {
        let _ = writeln!(
            out,
            "  trans {} {} {} {}",
            a.state_name(t.from),
            alphabet.name(t.letter),
            a.state_name(t.to),
            label(&t.label)
        );
    }
}

/// Canonical text of a nested automaton.
pub fn render_nwa(nwa: &Nwa) -> String {
    let mut out = String::from("nwa\n");
    let _ = writeln!(out, "alphabet {}", nwa.alphabet.names().join(" "));
    out.push_str("master\n");
    render_block(&mut out, &nwa.alphabet, &nwa.master, |&i| format!("invoke {}", i + 1));
    for (i, s) in nwa.slaves.iter().enumerate() {
        let vf = match s.value_fn {
            ValueFn::SumPlus => "sum+",
            _ => "sum",
        };
        let _ = writeln!(out, "slave {} valuefn {vf}", i + 1);
        render_block(&mut out, &nwa.alphabet, &s.automaton, |w| format!("weight {w}"));
    }
    out
}

fn parse_instr(l: &Line<'_>, text: &str, col: usize) -> Result<Instr> {
    match text {
        "s" => Ok(Instr::Start),
        "t" => Ok(Instr::Terminate),
        "." => Ok(Instr::Idle),
        "_" => Ok(Instr::Add(0)),
        _ => text.parse::<i64>().map(Instr::Add).or_else(|_| l.err(col, "`s`, `t`, `.`, `_` or an integer")),
    }
}

/// Parses the monitor-counter format.
pub fn parse_mca(text: &str) -> Result<Mca> {
    let mut cur = Cursor::new(text);
    cur.keyword("mca")?.finish(1)?;
    let alphabet = parse_alphabet(&mut cur)?;
    let cl = cur.keyword("counters")?;
    let ct = cl.tok(1, "counter count")?;
    let n_counters = ct.text.parse::<usize>().or_else(|_| cl.err(ct.col, "counter count"))?;
    cl.finish(2)?;
    let mut vector = |l: &Line<'_>, i: usize| -> Result<(Vec<Instr>, usize)> {
        let first = l.tok(i, "`[`")?;
        if !first.text.starts_with('[') {
            return l.err(first.col, "`[`");
        }
        let open = l.raw.char_indices().nth(first.col - 1).map(|(b, _)| b).unwrap_or(0);
        let rest = &l.raw[open + 1..];
        let Some(close) = rest.find(']') else {
            return l.err(l.end_col(), "`]`");
        };
        let inner = &rest[..close];
        let mut instrs = Vec::new();
        let mut col = first.col + 1;
        if !inner.trim().is_empty() {
            for part in inner.split(',') {
                let lead = part.len() - part.trim_start().len();
                let item = part.trim();
                if item.is_empty() {
                    return l.err(col + lead, "instruction");
                }
                instrs.push(parse_instr(l, item, col + lead)?);
                col += part.chars().count() + 1;
            }
        }
        let after = rest[close + 1..].trim();
        if !after.is_empty() {
            let c = l.raw.len() - l.raw[open + 1 + close + 1..].trim_start().len();
            return l.err(l.raw[..c].chars().count() + 1, "end of line");
        }
        // Consume every remaining token; the vector may contain spaces.
        Ok((instrs, l.tokens.len() - i))
    };
    let b = parse_block(&mut cur, &alphabet, &mut vector)?;
    if let Some(l) = cur.peek() {
        return l.err(l.tokens[0].col, "`trans`");
    }
    let automaton = Automaton::new(alphabet.len(), b.states, b.initial, b.accepting, b.transitions)?;
    Ok(Mca { alphabet, automaton, n_counters })
}

/// Canonical text of a monitor-counter automaton.
pub fn render_mca(mca: &Mca) -> String {
    let mut out = String::from("mca\n");
    let _ = writeln!(out, "alphabet {}", mca.alphabet.names().join(" "));
    let _ = writeln!(out, "counters {}", mca.n_counters);
    let mut body = String::new();
    render_block(&mut body, &mca.alphabet, &mca.automaton, |v| {
        format!("[{}]", v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
    });
    for l in body.lines() {
        out.push_str(l.trim_start());
        out.push('\n');
    }
    out
}

/// Parses `"prefix | period"` over `alphabet`; letters are separated by whitespace.
pub fn parse_lasso(alphabet: &Alphabet, text: &str) -> Result<LassoWord> {
    fn err<T>(col: usize, expected: &str) -> Result<T> {
        Err(Error::Syntax { line: 1, col, expected: expected.into() })
    }
    let Some(bar) = text.find('|') else {
        return err(text.chars().count() + 1, "`|` between prefix and period");
    };
    let letters = |part: &str, offset: usize| -> Result<Vec<Letter>> {
        let mut out = Vec::new();
        let mut pos = offset;
        for chunk in part.split_inclusive(char::is_whitespace) {
            let word = chunk.trim();
            if !word.is_empty() {
                let col = text[..pos].chars().count() + 1 + (chunk.len() - chunk.trim_start().len());
                match alphabet.id(word) {
                    Some(a) => out.push(a),
                    None => return err(col, "letter of the alphabet"),
                }
            }
            pos += chunk.len();
        }
        Ok(out)
    };
    let prefix = letters(&text[..bar], 0)?;
    let rest = &text[bar + 1..];
    if let Some(second) = rest.find('|') {
        return err(text[..bar + 1 + second].chars().count() + 1, "a single `|`");
    }
    let period = letters(rest, bar + 1)?;
    if period.is_empty() {
        return err(text.chars().count() + 1, "nonempty period");
    }
    Ok(LassoWord { prefix, period })
}
