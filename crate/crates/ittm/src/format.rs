//! Text format for machine tables.
//!
//! A document is a header line followed by one transition line per table
//! entry, in any order, with `#` comments and blank lines allowed
//! anywhere:
//!
//! ```text
//! classical states=2
//! A 0 -> 1 R B
//! A 1 -> 1 L B
//! B 0 -> 1 L A
//! B 1 -> 1 R HALT
//! ```
//!
//! ```text
//! ittm states=1 rule=limsup
//! S0 (0,0,0) -> (0,1,0) R HALT
//! LIM (0,0,0) -> (0,0,0) R S0
//! # ... one line per (row, read triple)
//! ```
//!
//! The table must be total: every `(state, read)` pair exactly once,
//! including the eight limit-row entries of a transfinite machine. `LIM`
//! names the limit row on the left of a transition but is never a valid
//! target. Serialization is canonical (rows in order, single spaces), so
//! parsing a serialized document gives the value back, and serializing a
//! parsed document canonicalizes whatever layout the input used.

use crate::classical::{ClassicalAction, ClassicalMachine, ClassicalTarget, Dir, MAX_NAMED_STATES};
use crate::ittm::{
    triple_index, ITTMachine, IttmAction, IttmTarget, LimitRule, RowId, Triple,
};

/// A parsed document: the machine plus, for transfinite machines, the
/// limit rule the header declared.
#[derive(Clone, PartialEq, Debug)]
pub enum MachineDocument {
    Classical(ClassicalMachine),
    Ittm { machine: ITTMachine, rule: LimitRule },
}

/// Where and why parsing failed. Lines and columns are 1-based; errors
/// about missing table entries point just past the last line.
#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
#[error("line {line}, column {column}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub reason: String,
}

impl ParseError {
    fn new(line: usize, column: usize, reason: impl Into<String>) -> Self {
        ParseError { line, column, reason: reason.into() }
    }
}

/// Token walker over one line. Tokens are whitespace-separated; columns
/// count characters from 1.
struct LineCursor<'a> {
    line_no: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> LineCursor<'a> {
    fn new(line_no: usize, text: &'a str) -> Self {
        LineCursor { line_no, text, pos: 0 }
    }

    fn next_token(&mut self) -> Option<(usize, &'a str)> {
        let rest = &self.text[self.pos..];
        let skip = rest.len() - rest.trim_start().len();
        let start = self.pos + skip;
        if start >= self.text.len() {
            self.pos = self.text.len();
            return None;
        }
        let token = self.text[start..].split_whitespace().next().unwrap();
        self.pos = start + token.len();
        Some((start + 1, token))
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        self.next_token().ok_or_else(|| {
            ParseError::new(self.line_no, self.text.len() + 1, format!("expected {what}"))
        })
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        match self.next_token() {
            None => Ok(()),
            Some((col, token)) => Err(ParseError::new(
                self.line_no,
                col,
                format!("unexpected trailing input {token:?}"),
            )),
        }
    }

    fn expect_arrow(&mut self) -> Result<(), ParseError> {
        let (col, token) = self.expect("'->'")?;
        if token != "->" {
            return Err(ParseError::new(self.line_no, col, format!("expected '->', found {token:?}")));
        }
        Ok(())
    }
}

fn parse_bit(line: usize, col: usize, token: &str) -> Result<u8, ParseError> {
    match token {
        "0" => Ok(0),
        "1" => Ok(1),
        _ => Err(ParseError::new(line, col, format!("expected a bit, found {token:?}"))),
    }
}

fn parse_dir(line: usize, col: usize, token: &str) -> Result<Dir, ParseError> {
    match token {
        "L" => Ok(Dir::L),
        "R" => Ok(Dir::R),
        _ => Err(ParseError::new(line, col, format!("expected 'L' or 'R', found {token:?}"))),
    }
}

fn parse_triple(line: usize, col: usize, token: &str) -> Result<Triple, ParseError> {
    let bad = || {
        ParseError::new(line, col, format!("expected a triple like (0,1,0), found {token:?}"))
    };
    let inner = token.strip_prefix('(').and_then(|t| t.strip_suffix(')')).ok_or_else(bad)?;
    let mut bits = [0u8; 3];
    let mut parts = inner.split(',');
    for slot in &mut bits {
        let part = parts.next().ok_or_else(bad)?;
        *slot = match part {
            "0" => 0,
            "1" => 1,
            _ => return Err(bad()),
        };
    }
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(bits)
}

/// `A`..`Z` as a row index below `n`.
fn parse_classical_state(line: usize, col: usize, token: &str, n: usize) -> Result<u8, ParseError> {
    let mut chars = token.chars();
    match (chars.next(), chars.next()) {
        (Some(c @ 'A'..='Z'), None) => {
            let s = c as u8 - b'A';
            if (s as usize) < n {
                Ok(s)
            } else {
                Err(ParseError::new(
                    line,
                    col,
                    format!("state {c} is out of range, the table has {n} states"),
                ))
            }
        }
        _ => Err(ParseError::new(line, col, format!("expected a state A..Z, found {token:?}"))),
    }
}

fn parse_ittm_row(line: usize, col: usize, token: &str, n: usize) -> Result<RowId, ParseError> {
    if token == "LIM" {
        return Ok(RowId::Limit);
    }
    parse_ittm_state(line, col, token, n).map(RowId::State)
}

fn parse_ittm_state(line: usize, col: usize, token: &str, n: usize) -> Result<u16, ParseError> {
    let digits = token.strip_prefix('S').unwrap_or("");
    let ok = !digits.is_empty()
        && digits.chars().all(|c| c.is_ascii_digit())
        && (digits == "0" || !digits.starts_with('0'));
    if !ok {
        return Err(ParseError::new(
            line,
            col,
            format!("expected a state like S0, found {token:?}"),
        ));
    }
    let s: u16 = digits.parse().map_err(|_| {
        ParseError::new(line, col, format!("state index in {token:?} is too large"))
    })?;
    if (s as usize) < n {
        Ok(s)
    } else {
        Err(ParseError::new(
            line,
            col,
            format!("state S{s} is out of range, the table has {n} states"),
        ))
    }
}

struct Header {
    kind: HeaderKind,
    states: usize,
    rule: Option<LimitRule>,
}

#[derive(PartialEq, Clone, Copy)]
enum HeaderKind {
    Classical,
    Ittm,
}

fn parse_header(line_no: usize, text: &str) -> Result<Header, ParseError> {
    let mut cursor = LineCursor::new(line_no, text);
    let (col, kind_token) = cursor.expect("a machine kind, 'classical' or 'ittm'")?;
    let kind = match kind_token {
        "classical" => HeaderKind::Classical,
        "ittm" => HeaderKind::Ittm,
        _ => {
            return Err(ParseError::new(
                line_no,
                col,
                format!("expected 'classical' or 'ittm', found {kind_token:?}"),
            ))
        }
    };
    let (col, states_token) = cursor.expect("'states=<n>'")?;
    let states: usize = states_token
        .strip_prefix("states=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| {
            ParseError::new(line_no, col, format!("expected 'states=<n>', found {states_token:?}"))
        })?;
    if states == 0 {
        return Err(ParseError::new(line_no, col, "a machine needs at least one state"));
    }
    if kind == HeaderKind::Classical && states > MAX_NAMED_STATES {
        return Err(ParseError::new(
            line_no,
            col,
            format!("classical tables go up to {MAX_NAMED_STATES} states"),
        ));
    }
    let rule = match kind {
        HeaderKind::Classical => None,
        HeaderKind::Ittm => {
            let (col, rule_token) = cursor.expect("'rule=limsup' or 'rule=liminf'")?;
            Some(match rule_token {
                "rule=limsup" => LimitRule::Limsup,
                "rule=liminf" => LimitRule::Liminf,
                _ => {
                    return Err(ParseError::new(
                        line_no,
                        col,
                        format!("expected 'rule=limsup' or 'rule=liminf', found {rule_token:?}"),
                    ))
                }
            })
        }
    };
    cursor.finish()?;
    Ok(Header { kind, states, rule })
}

/// One parsed ITTM transition line.
struct IttmLine {
    row: RowId,
    read: Triple,
    action: IttmAction,
}

fn parse_ittm_line(line_no: usize, text: &str, n: usize) -> Result<IttmLine, ParseError> {
    let mut cursor = LineCursor::new(line_no, text);
    let (col, row_token) = cursor.expect("a row, S<i> or LIM")?;
    let row = parse_ittm_row(line_no, col, row_token, n)?;
    let (col, read_token) = cursor.expect("a read triple")?;
    let read = parse_triple(line_no, col, read_token)?;
    cursor.expect_arrow()?;
    let (col, write_token) = cursor.expect("a write triple")?;
    let write = parse_triple(line_no, col, write_token)?;
    let (col, dir_token) = cursor.expect("a direction")?;
    let dir = parse_dir(line_no, col, dir_token)?;
    let (col, target_token) = cursor.expect("a target state or HALT")?;
    let next = match target_token {
        "HALT" => IttmTarget::Halt,
        "LIM" => {
            return Err(ParseError::new(line_no, col, "the limit state is not a valid target"))
        }
        _ => IttmTarget::State(parse_ittm_state(line_no, col, target_token, n)?),
    };
    cursor.finish()?;
    Ok(IttmLine { row, read, action: IttmAction { write, dir, next } })
}

fn parse_classical_line(
    line_no: usize,
    text: &str,
    n: usize,
) -> Result<(u8, u8, ClassicalAction), ParseError> {
    let mut cursor = LineCursor::new(line_no, text);
    let (col, state_token) = cursor.expect("a state A..Z")?;
    let state = parse_classical_state(line_no, col, state_token, n)?;
    let (col, read_token) = cursor.expect("a read bit")?;
    let read = parse_bit(line_no, col, read_token)?;
    cursor.expect_arrow()?;
    let (col, write_token) = cursor.expect("a write bit")?;
    let write = parse_bit(line_no, col, write_token)?;
    let (col, dir_token) = cursor.expect("a direction")?;
    let dir = parse_dir(line_no, col, dir_token)?;
    let (col, target_token) = cursor.expect("a target state or HALT")?;
    let next = match target_token {
        "HALT" => ClassicalTarget::Halt,
        _ => ClassicalTarget::State(parse_classical_state(line_no, col, target_token, n)?),
    };
    cursor.finish()?;
    Ok((state, read, ClassicalAction { write, dir, next }))
}

fn is_skippable(line: &str) -> bool {
    let trimmed = line.trim_start();
    trimmed.is_empty() || trimmed.starts_with('#')
}

/// Parses a full document: header, transitions, totality check.
pub fn parse_document(text: &str) -> Result<MachineDocument, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (header_no, header_line) = lines
        .by_ref()
        .find(|(_, l)| !is_skippable(l))
        .ok_or_else(|| ParseError::new(1, 1, "empty document, expected a header line"))?;
    let header = parse_header(header_no, header_line)?;
    let body: Vec<(usize, &str)> = lines.filter(|(_, l)| !is_skippable(l)).collect();
    let end_line = text.lines().count() + 1;

    match header.kind {
        HeaderKind::Classical => {
            let n = header.states;
            let mut table: Vec<[Option<ClassicalAction>; 2]> = vec![[None; 2]; n];
            for (line_no, line) in body {
                let (state, read, action) = parse_classical_line(line_no, line, n)?;
                let slot = &mut table[state as usize][read as usize];
                if slot.is_some() {
                    return Err(ParseError::new(
                        line_no,
                        1,
                        format!("duplicate transition for state {} reading {read}", (b'A' + state) as char),
                    ));
                }
                *slot = Some(action);
            }
            let mut rows = Vec::with_capacity(n);
            for (s, [on_zero, on_one]) in table.into_iter().enumerate() {
                let missing = |bit: u8| {
                    ParseError::new(
                        end_line,
                        1,
                        format!(
                            "table is not total: state {} reading {bit} has no transition",
                            (b'A' + s as u8) as char
                        ),
                    )
                };
                rows.push([
                    on_zero.ok_or_else(|| missing(0))?,
                    on_one.ok_or_else(|| missing(1))?,
                ]);
            }
            Ok(MachineDocument::Classical(ClassicalMachine::new(rows)))
        }
        HeaderKind::Ittm => {
            let n = header.states;
            let machine = assemble_ittm(
                body.iter().map(|&(line_no, line)| parse_ittm_line(line_no, line, n)),
                n,
                end_line,
            )?;
            Ok(MachineDocument::Ittm { machine, rule: header.rule.unwrap() })
        }
    }
}

/// Collects parsed ITTM lines into a total table.
fn assemble_ittm(
    lines: impl Iterator<Item = Result<IttmLine, ParseError>>,
    n: usize,
    end_line: usize,
) -> Result<ITTMachine, ParseError> {
    let mut ordinary: Vec<[Option<IttmAction>; 8]> = vec![[None; 8]; n];
    let mut limit: [Option<IttmAction>; 8] = [None; 8];
    for line in lines {
        let IttmLine { row, read, action } = line?;
        let slot = match row {
            RowId::State(s) => &mut ordinary[s as usize][triple_index(read)],
            RowId::Limit => &mut limit[triple_index(read)],
        };
        if slot.is_some() {
            return Err(ParseError::new(
                end_line,
                1,
                format!(
                    "duplicate transition for {row} reading ({},{},{})",
                    read[0], read[1], read[2]
                ),
            ));
        }
        *slot = Some(action);
    }
    let missing = |row: RowId, i: usize| {
        let t = crate::ittm::triple_from_index(i);
        ParseError::new(
            end_line,
            1,
            format!("table is not total: {row} reading ({},{},{}) has no transition", t[0], t[1], t[2]),
        )
    };
    let mut rows = Vec::with_capacity(n);
    for (s, row) in ordinary.into_iter().enumerate() {
        let mut complete = Vec::with_capacity(8);
        for (i, entry) in row.into_iter().enumerate() {
            complete.push(entry.ok_or_else(|| missing(RowId::State(s as u16), i))?);
        }
        rows.push(std::array::from_fn(|i| complete[i]));
    }
    let mut complete_limit = Vec::with_capacity(8);
    for (i, entry) in limit.into_iter().enumerate() {
        complete_limit.push(entry.ok_or_else(|| missing(RowId::Limit, i))?);
    }
    Ok(ITTMachine::new(rows, std::array::from_fn(|i| complete_limit[i])))
}

/// Decodes the compact one-line encoding produced by
/// [`ITTMachine::encode`]: transition lines joined by `;`. Reported line
/// numbers count the `;`-separated pieces.
pub fn decode_ittm(compact: &str) -> Result<ITTMachine, ParseError> {
    let pieces: Vec<&str> = compact.split(';').collect();
    // The row names determine the state count.
    let mut n = 0usize;
    for piece in &pieces {
        if let Some(token) = piece.split_whitespace().next() {
            if let Some(digits) = token.strip_prefix('S') {
                if let Ok(s) = digits.parse::<usize>() {
                    n = n.max(s + 1);
                }
            }
        }
    }
    if n == 0 {
        return Err(ParseError::new(1, 1, "no ordinary rows in the encoding"));
    }
    let end_line = pieces.len() + 1;
    assemble_ittm(
        pieces.iter().enumerate().map(|(i, piece)| parse_ittm_line(i + 1, piece, n)),
        n,
        end_line,
    )
}

/// Canonical text form: header, then every transition in table order.
pub fn serialize_document(doc: &MachineDocument) -> String {
    let mut out = String::new();
    match doc {
        MachineDocument::Classical(m) => {
            out.push_str(&format!("classical states={}\n", m.n_states()));
            for (s, row) in m.rows().iter().enumerate() {
                for (bit, action) in row.iter().enumerate() {
                    let target = match action.next {
                        ClassicalTarget::State(t) => ((b'A' + t) as char).to_string(),
                        ClassicalTarget::Halt => "HALT".to_string(),
                    };
                    out.push_str(&format!(
                        "{} {bit} -> {} {} {target}\n",
                        (b'A' + s as u8) as char,
                        action.write,
                        action.dir,
                    ));
                }
            }
        }
        MachineDocument::Ittm { machine, rule } => {
            out.push_str(&format!("ittm states={} rule={}\n", machine.n_states(), rule.name()));
            let mut write_row = |row: RowId, actions: &[IttmAction; 8]| {
                for (i, action) in actions.iter().enumerate() {
                    let t = crate::ittm::triple_from_index(i);
                    let target = match action.next {
                        IttmTarget::State(s) => format!("S{s}"),
                        IttmTarget::Halt => "HALT".to_string(),
                    };
                    out.push_str(&format!(
                        "{row} ({},{},{}) -> ({},{},{}) {} {target}\n",
                        t[0], t[1], t[2], action.write[0], action.write[1], action.write[2], action.dir,
                    ));
                }
            };
            for (s, row) in machine.rows().iter().enumerate() {
                write_row(RowId::State(s as u16), row);
            }
            write_row(RowId::Limit, machine.limit_row());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ittm::all_triples;

    fn champion_doc() -> &'static str {
        "classical states=2\nA 0 -> 1 R B\nA 1 -> 1 L B\nB 0 -> 1 L A\nB 1 -> 1 R HALT\n"
    }

    #[test]
    fn classical_document_round_trips() {
        let doc = parse_document(champion_doc()).expect("parses");
        let MachineDocument::Classical(ref m) = doc else { panic!("wrong kind") };
        assert_eq!(m.encode(), "1RB1LB_1LA1RH");
        assert_eq!(serialize_document(&doc), champion_doc());
    }

    #[test]
    fn comments_blank_lines_and_order_are_canonicalized_away() {
        let messy = "# the two-state champion\n\nclassical states=2\n\nB 1 -> 1 R HALT\nA 0 -> 1 R B\n# middle comment\nB 0 -> 1 L A\nA 1 -> 1 L B\n";
        let doc = parse_document(messy).expect("parses");
        assert_eq!(serialize_document(&doc), champion_doc());
    }

    #[test]
    fn ittm_document_round_trips_through_both_forms() {
        let one_writer = ITTMachine::from_fn(1, |row, t| {
            let next = match row {
                RowId::Limit => IttmTarget::State(0),
                RowId::State(_) if t == [0, 0, 0] => IttmTarget::Halt,
                RowId::State(_) => IttmTarget::State(0),
            };
            IttmAction { write: [t[0], 1, t[2]], dir: Dir::R, next }
        });
        let doc = MachineDocument::Ittm { machine: one_writer.clone(), rule: LimitRule::Limsup };
        let text = serialize_document(&doc);
        assert!(text.starts_with("ittm states=1 rule=limsup\n"));
        assert_eq!(text.lines().count(), 1 + 16);
        assert_eq!(parse_document(&text).expect("parses"), doc);

        let compact = one_writer.encode();
        assert_eq!(decode_ittm(&compact).expect("decodes"), one_writer);
    }

    #[test]
    fn positional_errors_carry_line_and_column() {
        let err = parse_document("classical states=1\nA 0 -> 2 R A\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 8));
        assert!(err.reason.contains("expected a bit"), "{}", err.reason);

        let err = parse_document("classical states=1\nA 0 -> 1 X A\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 10));
        assert!(err.reason.contains("'L' or 'R'"), "{}", err.reason);

        let err = parse_document("classical states=1\nA 0 -> 1 R B\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 12));
        assert!(err.reason.contains("out of range"), "{}", err.reason);

        let err = parse_document("lassical states=1\n").unwrap_err();
        assert_eq!((err.line, err.column), (1, 1));
    }

    #[test]
    fn totality_errors_name_the_missing_entry() {
        let err = parse_document("classical states=2\nA 0 -> 1 R B\nA 1 -> 1 L B\nB 0 -> 1 L A\n")
            .unwrap_err();
        assert!(
            err.reason.contains("state B reading 1 has no transition"),
            "{}",
            err.reason
        );

        let mut text = String::from("ittm states=1 rule=liminf\n");
        // All ordinary entries, every limit entry except (0,1,1).
        for t in all_triples() {
            text.push_str(&format!("S0 ({},{},{}) -> (0,0,0) R S0\n", t[0], t[1], t[2]));
        }
        for t in all_triples().filter(|&t| t != [0, 1, 1]) {
            text.push_str(&format!("LIM ({},{},{}) -> (0,0,0) R S0\n", t[0], t[1], t[2]));
        }
        let err = parse_document(&text).unwrap_err();
        assert!(
            err.reason.contains("LIM reading (0,1,1) has no transition"),
            "{}",
            err.reason
        );
    }

    #[test]
    fn limit_state_is_rejected_as_a_target() {
        let mut text = String::from("ittm states=1 rule=limsup\n");
        text.push_str("S0 (0,0,0) -> (0,0,0) R LIM\n");
        let err = parse_document(&text).unwrap_err();
        assert_eq!(err.reason, "the limit state is not a valid target");
        assert_eq!(err.line, 2);
    }

    #[test]
    fn duplicate_entries_are_rejected() {
        let err = parse_document("classical states=1\nA 0 -> 1 R A\nA 0 -> 0 L A\nA 1 -> 1 R HALT\n")
            .unwrap_err();
        assert!(err.reason.contains("duplicate transition"), "{}", err.reason);
    }
}
