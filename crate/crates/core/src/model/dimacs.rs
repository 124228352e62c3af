//! DIMACS CNF with a community-layout header.
//!
//! Output looks like:
//!
//! ```text
//! c layout B=10 h=100
//! c seed=7 mixture=3:0.2;1,1,1:0.8
//! p cnf 1000 2
//! -423 459 496 0
//! 156 -437 626 0
//! ```
//!
//! The `c layout` comment must precede the `p` line; a file without one
//! is read as a single community (`B=1`, `h=n`), so plain DIMACS from
//! other tools loads fine. The `c seed=... mixture=...` provenance
//! comment is optional and round-trips through [`read_dimacs`] /
//! [`write_dimacs`]. Clauses may span lines; each ends with `0`.

use std::io::{BufRead, Write};

use thiserror::Error;

use super::{Clause, Instance, Layout, Literal, Mixture, Provenance};

#[derive(Debug, Error)]
pub enum DimacsError {
    #[error("line {line}: {detail}")]
    Parse { line: usize, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(line: usize, detail: impl Into<String>) -> DimacsError {
    DimacsError::Parse {
        line,
        detail: detail.into(),
    }
}

/// Reads one CNF instance.
pub fn read_dimacs(reader: impl BufRead) -> Result<Instance, DimacsError> {
    let mut layout_header: Option<(u32, u32)> = None;
    let mut provenance = Provenance::default();
    let mut problem: Option<(u32, usize)> = None;

    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut line_no = 0usize;

    for line in reader.lines() {
        let line = line?;
        line_no += 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(comment) = text.strip_prefix('c') {
            if problem.is_none() {
                parse_header_comment(
                    comment,
                    line_no,
                    &mut layout_header,
                    &mut provenance,
                )?;
            }
            continue;
        }
        if let Some(rest) = text.strip_prefix('p') {
            if problem.is_some() {
                return Err(parse_err(line_no, "second problem line"));
            }
            problem = Some(parse_problem_line(rest, line_no)?);
            continue;
        }
        let (n, m) = problem.ok_or_else(|| parse_err(line_no, "clause before problem line"))?;
        for tok in text.split_ascii_whitespace() {
            let code: i32 = tok
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad literal token {tok:?}")))?;
            if code == 0 {
                let clause = Clause::new(std::mem::take(&mut current))
                    .map_err(|e| parse_err(line_no, e.to_string()))?;
                if clauses.len() == m {
                    return Err(parse_err(line_no, format!("more than {m} clauses")));
                }
                clauses.push(clause);
            } else {
                let var = code.unsigned_abs();
                if var > n {
                    return Err(parse_err(
                        line_no,
                        format!("literal {code} outside 1..={n}"),
                    ));
                }
                current.push(Literal::new(code));
            }
        }
    }

    let (n, m) = problem.ok_or_else(|| parse_err(line_no, "missing problem line"))?;
    if !current.is_empty() {
        return Err(parse_err(line_no, "last clause is not terminated by 0"));
    }
    if clauses.len() != m {
        return Err(parse_err(
            line_no,
            format!("expected {m} clauses, found {}", clauses.len()),
        ));
    }

    let layout = match layout_header {
        Some((b, h)) => {
            let layout = Layout::new(b, h).map_err(|e| parse_err(line_no, e.to_string()))?;
            if layout.var_count() != n {
                return Err(parse_err(
                    line_no,
                    format!("layout B={b} h={h} does not cover {n} variables"),
                ));
            }
            layout
        }
        // No layout header: treat the file as one community.
        None => Layout::new(1, n).map_err(|e| parse_err(line_no, e.to_string()))?,
    };

    let instance = Instance::new(layout, clauses).map_err(|e| parse_err(line_no, e.to_string()))?;
    Ok(instance.with_provenance(provenance))
}

fn parse_header_comment(
    comment: &str,
    line_no: usize,
    layout: &mut Option<(u32, u32)>,
    provenance: &mut Provenance,
) -> Result<(), DimacsError> {
    let mut tokens = comment.split_ascii_whitespace().peekable();
    match tokens.peek() {
        Some(&"layout") => {
            tokens.next();
            let mut b = None;
            let mut h = None;
            for tok in tokens {
                if let Some(v) = tok.strip_prefix("B=") {
                    b = v.parse::<u32>().ok();
                } else if let Some(v) = tok.strip_prefix("h=") {
                    h = v.parse::<u32>().ok();
                }
            }
            match (b, h) {
                (Some(b), Some(h)) => *layout = Some((b, h)),
                _ => return Err(parse_err(line_no, "malformed layout header")),
            }
        }
        Some(tok) if tok.starts_with("seed=") || tok.starts_with("mixture=") => {
            for tok in tokens {
                if let Some(v) = tok.strip_prefix("seed=") {
                    let seed = v
                        .parse::<u64>()
                        .map_err(|_| parse_err(line_no, "malformed seed"))?;
                    provenance.seed = Some(seed);
                } else if let Some(v) = tok.strip_prefix("mixture=") {
                    let mixture: Mixture = v
                        .parse()
                        .map_err(|e| parse_err(line_no, format!("{e}")))?;
                    provenance.mixture = Some(mixture);
                }
            }
        }
        // Any other comment is free text.
        _ => {}
    }
    Ok(())
}

fn parse_problem_line(rest: &str, line_no: usize) -> Result<(u32, usize), DimacsError> {
    let mut tokens = rest.split_ascii_whitespace();
    if tokens.next() != Some("cnf") {
        return Err(parse_err(line_no, "problem line is not `p cnf n m`"));
    }
    let n: u32 = tokens
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(line_no, "bad variable count"))?;
    let m: usize = tokens
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(line_no, "bad clause count"))?;
    if n == 0 {
        return Err(parse_err(line_no, "variable count must be positive"));
    }
    if tokens.next().is_some() {
        return Err(parse_err(line_no, "trailing tokens on problem line"));
    }
    Ok((n, m))
}

/// Writes an instance in the format shown in the module docs.
pub fn write_dimacs(mut writer: impl Write, instance: &Instance) -> std::io::Result<()> {
    let layout = instance.layout();
    writeln!(
        writer,
        "c layout B={} h={}",
        layout.communities(),
        layout.community_size()
    )?;
    let provenance = instance.provenance();
    if !provenance.is_empty() {
        write!(writer, "c")?;
        if let Some(seed) = provenance.seed {
            write!(writer, " seed={seed}")?;
        }
        if let Some(mixture) = &provenance.mixture {
            write!(writer, " mixture={mixture}")?;
        }
        writeln!(writer)?;
    }
    writeln!(
        writer,
        "p cnf {} {}",
        layout.var_count(),
        instance.clause_count()
    )?;
    let mut line = String::new();
    for clause in instance.clauses() {
        line.clear();
        for lit in clause.literals() {
            line.push_str(&lit.code().to_string());
            line.push(' ');
        }
        line.push('0');
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::ClauseType;
    use super::*;

    fn lit(code: i32) -> Literal {
        Literal::new(code)
    }

    fn read(text: &str) -> Result<Instance, DimacsError> {
        read_dimacs(text.as_bytes())
    }

    #[test]
    fn round_trip_with_provenance() {
        let layout = Layout::new(10, 100).unwrap();
        let clauses = vec![
            Clause::new(vec![lit(-423), lit(459), lit(496)]).unwrap(),
            Clause::new(vec![lit(156), lit(-437), lit(626)]).unwrap(),
        ];
        let mixture: Mixture = "3:0.2;1,1,1:0.8".parse().unwrap();
        let instance = Instance::new(layout, clauses)
            .unwrap()
            .with_provenance(Provenance {
                seed: Some(7),
                mixture: Some(mixture),
            });

        let mut buf = Vec::new();
        write_dimacs(&mut buf, &instance).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("c layout B=10 h=100\nc seed=7 mixture=3:0.2;1,1,1:0.8\n"));

        let back = read(&text).unwrap();
        assert_eq!(back, instance);
    }

    #[test]
    fn missing_layout_header_means_one_community() {
        let inst = read("p cnf 4 1\n1 -2 0\n").unwrap();
        assert_eq!(inst.layout().communities(), 1);
        assert_eq!(inst.layout().community_size(), 4);
        assert_eq!(inst.clause_count(), 1);
    }

    #[test]
    fn clause_may_span_lines_and_share_lines() {
        let inst = read("p cnf 5 3\n1 2\n0 3 -4 0\n5 0\n").unwrap();
        assert_eq!(inst.clause_count(), 3);
        assert_eq!(inst.clauses()[0], Clause::new(vec![lit(1), lit(2)]).unwrap());
        assert_eq!(inst.clauses()[2], Clause::new(vec![lit(5)]).unwrap());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = read("p cnf 3 1\n1 x 0\n").unwrap_err();
        assert!(matches!(err, DimacsError::Parse { line: 2, .. }), "{err}");

        let err = read("p cnf 3 1\n1 4 0\n").unwrap_err();
        assert!(matches!(err, DimacsError::Parse { line: 2, .. }), "{err}");

        let err = read("p cnf 3 2\n1 0\n").unwrap_err();
        let text = err.to_string();
        assert!(text.contains("expected 2 clauses"), "{text}");

        let err = read("p cnf 3 1\n1 2\n").unwrap_err();
        assert!(err.to_string().contains("not terminated"), "{err}");

        let err = read("p cnf 3 1\n1 1 0\n").unwrap_err();
        assert!(err.to_string().contains("twice"), "{err}");

        let err = read("1 2 0\n").unwrap_err();
        assert!(err.to_string().contains("before problem line"), "{err}");

        let err = read("c layout B=3 h=2\np cnf 5 0\n").unwrap_err();
        assert!(err.to_string().contains("does not cover"), "{err}");

        let err = read("c layout B=3\np cnf 6 0\n").unwrap_err();
        assert!(err.to_string().contains("malformed layout"), "{err}");

        let err = read("p cnf 0 0\n").unwrap_err();
        assert!(err.to_string().contains("positive"), "{err}");
    }

    #[test]
    fn too_many_clauses_rejected() {
        let err = read("p cnf 2 1\n1 0 2 0\n").unwrap_err();
        assert!(err.to_string().contains("more than 1"), "{err}");
    }

    #[test]
    fn layout_header_after_problem_line_is_plain_comment() {
        let inst = read("p cnf 4 1\nc layout B=2 h=2\n1 0\n").unwrap();
        assert_eq!(inst.layout().communities(), 1);
    }

    #[test]
    fn free_comments_ignored() {
        let inst = read("c generated for a smoke test\nc layout B=2 h=2\np cnf 4 1\n-1 3 0\n")
            .unwrap();
        assert_eq!(inst.layout().communities(), 2);
        assert_eq!(
            inst.layout()
                .clause_type_of(&inst.clauses()[0])
                .unwrap(),
            ClauseType::new(vec![1, 1])
        );
    }

    #[test]
    fn seed_only_provenance() {
        let inst = read("c layout B=1 h=3\nc seed=99\np cnf 3 0\n").unwrap();
        assert_eq!(inst.provenance().seed, Some(99));
        assert_eq!(inst.provenance().mixture, None);
    }
}
