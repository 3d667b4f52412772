//! SDPA sparse text format (`.dat-s`).
//!
//! Layout written by [`export_sdpa`]:
//!
//! ```text
//! * comment lines (label, block notes)
//! <mDIM>
//! <nBLOCK>
//! <bLOCKsTRUCT>          negative sizes mark diagonal blocks
//! <c_1 ... c_m>
//! <matno> <blkno> <i> <j> <value>     1-based, i <= j, matno 0 is F0
//! ```
//!
//! Numbers are printed in shortest round-trip exponent form, so the text is
//! deterministic and re-importing reproduces every value bit-exactly.

use std::fmt::Write as _;

use thiserror::Error;

use crate::problem::{BlockKind, ProblemError, SdpProblem};

#[derive(Debug, Error, PartialEq)]
pub enum SdpaError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unexpected end of input while reading {0}")]
    UnexpectedEof(&'static str),
    #[error("line {line}: {source}")]
    Problem {
        line: usize,
        #[source]
        source: ProblemError,
    },
}

pub fn export_sdpa(problem: &SdpProblem) -> String {
    let mut out = String::new();
    let label = if problem.label().is_empty() {
        "unnamed"
    } else {
        problem.label()
    };
    let _ = writeln!(out, "* {label}");
    let _ = writeln!(
        out,
        "* primal: min c.x s.t. sum_i F_i x_i - F_0 >= 0; dual: max F_0.Y s.t. F_i.Y = c_i, Y >= 0"
    );
    for (k, (kind, note)) in problem.blocks().iter().zip(problem.block_notes()).enumerate() {
        let shape = match kind {
            BlockKind::Dense(n) => format!("dense {n}x{n}"),
            BlockKind::Diagonal(n) => format!("diagonal {n}"),
        };
        if note.is_empty() {
            let _ = writeln!(out, "* block {}: {shape}", k + 1);
        } else {
            let _ = writeln!(out, "* block {}: {shape}: {note}", k + 1);
        }
    }
    let _ = writeln!(out, "{}", problem.num_vars());
    let _ = writeln!(out, "{}", problem.blocks().len());
    let sizes: Vec<String> = problem
        .blocks()
        .iter()
        .map(|b| b.sdpa_size().to_string())
        .collect();
    let _ = writeln!(out, "{}", sizes.join(" "));
    let costs: Vec<String> = problem.objective().iter().map(|c| format!("{c:e}")).collect();
    let _ = writeln!(out, "{}", costs.join(" "));
    for index in 0..=problem.num_vars() {
        for (&(block, row, col), value) in problem.matrix(index) {
            let _ = writeln!(
                out,
                "{} {} {} {} {:e}",
                index,
                block + 1,
                row + 1,
                col + 1,
                value
            );
        }
    }
    out
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, what: &'static str) -> Result<(usize, &'a str), SdpaError> {
        let t = self
            .items
            .get(self.pos)
            .copied()
            .ok_or(SdpaError::UnexpectedEof(what))?;
        self.pos += 1;
        Ok(t)
    }

    fn done(&self) -> bool {
        self.pos >= self.items.len()
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T, SdpaError> {
    tok.parse().map_err(|_| SdpaError::Syntax {
        line,
        message: format!("expected {what}, found `{tok}`"),
    })
}

/// Parses SDPA sparse text. Accepts `"`/`*` comment lines, `{}(),=`
/// punctuation, and trailing annotations on the mDIM/nBLOCK lines.
pub fn import_sdpa(text: &str) -> Result<SdpProblem, SdpaError> {
    let mut header_lines = Vec::new();
    let mut items = Vec::new();
    let mut comments = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let trimmed = raw.trim();
        if let Some(comment) = trimmed.strip_prefix('*') {
            comments.push(comment.trim());
            continue;
        }
        if trimmed.is_empty() || trimmed.starts_with('"') {
            continue;
        }
        if header_lines.len() < 2 {
            // mDIM and nBLOCK lines may carry trailing text such as "=mDIM".
            let first = trimmed
                .split(|c: char| c.is_whitespace() || "{}(),=".contains(c))
                .find(|s| !s.is_empty())
                .unwrap_or("");
            header_lines.push((line_no, first));
            continue;
        }
        for tok in trimmed.split(|c: char| c.is_whitespace() || "{}(),=".contains(c)) {
            if !tok.is_empty() {
                items.push((line_no, tok));
            }
        }
    }
    if header_lines.len() < 2 {
        return Err(SdpaError::UnexpectedEof("header"));
    }
    let (l, t) = header_lines[0];
    let m: usize = parse_num(l, t, "mDIM")?;
    let (l, t) = header_lines[1];
    let nblock: usize = parse_num(l, t, "nBLOCK")?;

    let mut toks = Tokens { items, pos: 0 };
    let mut blocks = Vec::with_capacity(nblock);
    for _ in 0..nblock {
        let (l, t) = toks.next("block structure")?;
        let s: i64 = parse_num(l, t, "block size")?;
        blocks.push(if s < 0 {
            BlockKind::Diagonal(s.unsigned_abs() as usize)
        } else {
            BlockKind::Dense(s as usize)
        });
    }
    let mut problem =
        SdpProblem::new(m, blocks).map_err(|source| SdpaError::Problem { line: 0, source })?;
    restore_comments(&mut problem, &comments);
    for i in 0..m {
        let (l, t) = toks.next("objective vector")?;
        let c: f64 = parse_num(l, t, "objective coefficient")?;
        problem
            .set_objective(i, c)
            .map_err(|source| SdpaError::Problem { line: l, source })?;
    }
    while !toks.done() {
        let (l, t) = toks.next("entry")?;
        let matno: usize = parse_num(l, t, "matrix number")?;
        let (l, t) = toks.next("entry block")?;
        let blk: usize = parse_num(l, t, "block number")?;
        let (l, t) = toks.next("entry row")?;
        let i: usize = parse_num(l, t, "row")?;
        let (l, t) = toks.next("entry column")?;
        let j: usize = parse_num(l, t, "column")?;
        let (l, t) = toks.next("entry value")?;
        let v: f64 = parse_num(l, t, "value")?;
        if blk == 0 || i == 0 || j == 0 {
            return Err(SdpaError::Syntax {
                line: l,
                message: "block, row and column indices are 1-based".into(),
            });
        }
        problem
            .add_entry(matno, blk - 1, i - 1, j - 1, v)
            .map_err(|source| SdpaError::Problem { line: l, source })?;
    }
    Ok(problem)
}

/// Recovers the label and block notes written by [`export_sdpa`].
fn restore_comments(problem: &mut SdpProblem, comments: &[&str]) {
    let mut iter = comments.iter();
    if let Some(first) = iter.next() {
        if *first != "unnamed" && !first.starts_with("block ") {
            problem.set_label(*first);
        }
    }
    for c in comments {
        let Some(rest) = c.strip_prefix("block ") else {
            continue;
        };
        let mut parts = rest.splitn(3, ": ");
        let (Some(idx), Some(_shape)) = (parts.next(), parts.next()) else {
            continue;
        };
        if let (Ok(k), Some(note)) = (idx.parse::<usize>(), parts.next()) {
            if k >= 1 {
                problem.set_block_note(k - 1, note);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> SdpProblem {
        // min x s.t. [[x, 1], [1, x]] >= 0  ->  x = 1
        let mut p = SdpProblem::new(1, vec![BlockKind::Dense(2)]).unwrap().with_label("toy");
        p.set_objective(0, 1.0).unwrap();
        p.add_entry(1, 0, 0, 0, 1.0).unwrap();
        p.add_entry(1, 0, 1, 1, 1.0).unwrap();
        p.add_entry(0, 0, 0, 1, -1.0).unwrap();
        p
    }

    #[test]
    fn toy_export_is_canonical() {
        let text = export_sdpa(&toy());
        let expected = "* toy\n\
* primal: min c.x s.t. sum_i F_i x_i - F_0 >= 0; dual: max F_0.Y s.t. F_i.Y = c_i, Y >= 0\n\
* block 1: dense 2x2\n\
1\n1\n2\n1e0\n0 1 1 2 -1e0\n1 1 1 1 1e0\n1 1 2 2 1e0\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn import_accepts_classic_punctuation() {
        let text = "\"example from the SDPA manual\n2 =mDIM\n2 =nBLOCK\n{2, -1}\n{10, 20}\n\
0 1 1 1 1.0\n1 1 1 2 2.5\n2 2 1 1 -3\n";
        let p = import_sdpa(text).unwrap();
        assert_eq!(p.num_vars(), 2);
        assert_eq!(p.blocks(), &[BlockKind::Dense(2), BlockKind::Diagonal(1)]);
        assert_eq!(p.objective(), &[10.0, 20.0]);
        assert_eq!(p.matrix(1).get(&(0, 0, 1)), Some(&2.5));
        assert_eq!(p.matrix(2).get(&(1, 0, 0)), Some(&-3.0));
    }

    #[test]
    fn lower_triangle_entries_are_mirrored() {
        let text = "1\n1\n3\n1\n1 1 3 1 4.0\n";
        let p = import_sdpa(text).unwrap();
        assert_eq!(p.matrix(1).get(&(0, 0, 2)), Some(&4.0));
    }

    #[test]
    fn truncated_input_is_reported() {
        assert_eq!(
            import_sdpa("2\n1\n2\n1.0\n"),
            Err(SdpaError::UnexpectedEof("objective vector"))
        );
        assert!(matches!(
            import_sdpa("1\n1\n2\n1\n1 1 1 3 1.0\n"),
            Err(SdpaError::Problem { line: 5, .. })
        ));
        assert!(matches!(
            import_sdpa("1\n1\n2\nabc\n"),
            Err(SdpaError::Syntax { line: 4, .. })
        ));
    }

    #[test]
    fn round_trip_is_exact() {
        let mut p = toy();
        p.set_block_note(0, "2x2 toy block");
        p.add_entry(1, 0, 0, 1, 0.1 + 0.2).unwrap();
        p.set_objective(0, 1.0 / 3.0).unwrap();
        let back = import_sdpa(&export_sdpa(&p)).unwrap();
        assert_eq!(back.objective(), p.objective());
        for i in 0..=p.num_vars() {
            assert_eq!(back.matrix(i), p.matrix(i));
        }
        assert_eq!(export_sdpa(&back), export_sdpa(&p));
    }
}
