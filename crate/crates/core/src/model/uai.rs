use std::fmt::Write as _;

use super::{Instantiation, Network, Variable};
use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::logspace::to_log;
use crate::VarId;

/// Whitespace tokenizer that remembers the line of each token.
struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)))
            .collect();
        Tokens {
            items,
            pos: 0,
            last_line: text.lines().count().max(1),
        }
    }

    fn line(&self) -> usize {
        self.items.get(self.pos).map_or(self.last_line, |t| t.0)
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let t = self.items.get(self.pos).copied().ok_or_else(|| Error::Parse {
            line: self.last_line,
            msg: format!("unexpected end of input, expected {what}"),
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let (line, tok) = self.next(what)?;
        tok.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("expected {what}, found {tok:?}"),
        })
    }

    fn f64(&mut self, what: &str) -> Result<(usize, f64)> {
        let (line, tok) = self.next(what)?;
        tok.parse().map(|x| (line, x)).map_err(|_| Error::Parse {
            line,
            msg: format!("expected {what}, found {tok:?}"),
        })
    }

    fn finish(&self) -> Result<()> {
        match self.items.get(self.pos) {
            Some(&(line, tok)) => Err(Error::Parse {
                line,
                msg: format!("trailing token {tok:?}"),
            }),
            None => Ok(()),
        }
    }
}

/// Parses a UAI `BAYES` model. Each factor is the CPT of the last variable
/// in its scope; every variable must own exactly one factor.
pub fn parse_uai(text: &str) -> Result<Network> {
    let mut toks = Tokens::new(text);
    let (line, header) = toks.next("BAYES header")?;
    if header != "BAYES" {
        return Err(Error::Parse {
            line,
            msg: format!("expected BAYES header, found {header:?}"),
        });
    }
    let n = toks.usize("variable count")?;
    let mut cards = Vec::with_capacity(n);
    for i in 0..n {
        let line = toks.line();
        let c = toks.usize("cardinality")?;
        if c == 0 {
            return Err(Error::Parse {
                line,
                msg: format!("variable {i} has cardinality 0"),
            });
        }
        cards.push(c);
    }
    let line = toks.line();
    let m = toks.usize("factor count")?;
    if m != n {
        return Err(Error::Parse {
            line,
            msg: format!("expected {n} factors (one per variable), found {m}"),
        });
    }

    let mut scopes: Vec<(usize, Vec<VarId>)> = Vec::with_capacity(m);
    for _ in 0..m {
        let line = toks.line();
        let k = toks.usize("scope size")?;
        if k == 0 {
            return Err(Error::Parse {
                line,
                msg: "empty factor scope".into(),
            });
        }
        let mut scope = Vec::with_capacity(k);
        for _ in 0..k {
            let v = toks.usize("variable index")?;
            if v >= n {
                return Err(Error::Parse {
                    line,
                    msg: format!("variable index {v} out of range"),
                });
            }
            scope.push(v);
        }
        scopes.push((line, scope));
    }

    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (f, (line, scope)) in scopes.iter().enumerate() {
        let child = *scope.last().expect("non-empty");
        if owner[child].replace(f).is_some() {
            return Err(Error::Parse {
                line: *line,
                msg: format!("variable {child} owns more than one factor"),
            });
        }
    }

    let mut tables: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (line, scope) in &scopes {
        let expected: usize = scope.iter().map(|&v| cards[v]).product();
        let count_line = toks.line();
        let count = toks.usize("table entry count")?;
        if count != expected {
            return Err(Error::Parse {
                line: count_line,
                msg: format!(
                    "table for variable {} has {count} entries, expected {expected} (scope on line {line})",
                    scope.last().unwrap()
                ),
            });
        }
        let mut table = Vec::with_capacity(count);
        for _ in 0..count {
            let (l, x) = toks.f64("table entry")?;
            if !(x >= 0.0 && x.is_finite()) {
                return Err(Error::Parse {
                    line: l,
                    msg: format!("invalid probability {x}"),
                });
            }
            table.push(x);
        }
        tables.push(table);
    }
    toks.finish()?;

    let variables: Vec<Variable> = cards
        .iter()
        .enumerate()
        .map(|(id, &cardinality)| Variable {
            id,
            name: format!("v{id}"),
            cardinality,
        })
        .collect();
    let mut parents = vec![Vec::new(); n];
    let mut cpts = Vec::with_capacity(n);
    for (var, f) in owner.iter().enumerate() {
        let f = f.ok_or_else(|| Error::Parse {
            line: scopes.last().map_or(1, |s| s.0),
            msg: format!("variable {var} has no factor"),
        })?;
        let scope = &scopes[f].1;
        parents[var] = scope[..scope.len() - 1].to_vec();
        if parents[var].contains(&var) {
            return Err(Error::Parse {
                line: scopes[f].0,
                msg: format!("variable {var} is its own parent"),
            });
        }
        let cs = scope.iter().map(|&v| cards[v]).collect();
        cpts.push(Factor::new(
            scope.clone(),
            cs,
            tables[f].iter().map(|&p| to_log(p)).collect(),
        )?);
    }
    Network::new(variables, parents, cpts)
}

/// Parses UAI evidence: a count followed by `variable value` pairs.
pub fn parse_evidence(text: &str, net: &Network) -> Result<Instantiation> {
    let mut toks = Tokens::new(text);
    let count = toks.usize("evidence count")?;
    let mut e = Instantiation::new();
    for _ in 0..count {
        let var = toks.usize("variable index")?;
        let value = toks.usize("value index")?;
        if var >= net.len() {
            return Err(Error::VariableOutOfRange {
                var,
                count: net.len(),
            });
        }
        if value >= net.cardinality(var) {
            return Err(Error::ValueOutOfRange {
                var,
                value,
                cardinality: net.cardinality(var),
            });
        }
        if e.contains(var) {
            return Err(Error::DuplicateVariable { var });
        }
        e.set(var, value);
    }
    toks.finish()?;
    Ok(e)
}

pub fn serialize_evidence(e: &Instantiation) -> String {
    let mut out = format!("{}", e.len());
    for (var, value) in e.iter() {
        let _ = write!(out, " {var} {value}");
    }
    out.push('\n');
    out
}

/// Prints a probability rounded to 15 significant digits, so that values
/// such as `exp(ln 0.1)` come out as `0.1`.
fn format_prob(log_p: f64) -> String {
    if log_p == f64::NEG_INFINITY {
        return "0".into();
    }
    let p = log_p.exp();
    let rounded: f64 = format!("{p:.14e}").parse().unwrap_or(p);
    format!("{rounded}")
}

pub fn serialize_uai(net: &Network) -> String {
    let mut out = String::from("BAYES\n");
    let _ = writeln!(out, "{}", net.len());
    let cards: Vec<String> = net.cardinalities().iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "{}", cards.join(" "));
    let _ = writeln!(out, "{}", net.len());
    for v in 0..net.len() {
        let fam = net.family(v);
        let _ = write!(out, "{}", fam.len());
        for u in fam {
            let _ = write!(out, " {u}");
        }
        out.push('\n');
    }
    for cpt in net.cpts() {
        out.push('\n');
        let _ = writeln!(out, "{}", cpt.len());
        let card = *cpt.cards().last().unwrap();
        for row in cpt.table().chunks(card) {
            let vals: Vec<String> = row.iter().map(|&x| format_prob(x)).collect();
            let _ = writeln!(out, "{}", vals.join(" "));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::two_node;

    const TWO_NODE: &str = "BAYES\n2\n2 2\n2\n1 0\n2 0 1\n\n2\n0.2 0.8\n\n4\n0.1 0.9\n0.7 0.3\n";

    #[test]
    fn parses_two_node() {
        let net = parse_uai(TWO_NODE).unwrap();
        assert_eq!(net.len(), 2);
        assert_eq!(net.parents(1), &[0]);
        assert!((net.log_prob(&[1, 0]).exp() - 0.56).abs() < 1e-12);
    }

    #[test]
    fn single_node_serializes_exactly() {
        let net = parse_uai("BAYES 1 2 1 1 0 2 0.5 0.5").unwrap();
        assert_eq!(net.len(), 1);
        let text = serialize_uai(&net);
        let squash = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
        assert_eq!(squash(&text), squash("BAYES\n1\n2\n1\n1 0\n2\n0.5 0.5\n"));
    }

    #[test]
    fn two_node_table_text() {
        let text = serialize_uai(&two_node());
        assert!(text.contains("0.1 0.9\n0.7 0.3"));
    }

    #[test]
    fn unnormalized_column_names_variable() {
        let bad = "BAYES\n2\n2 2\n2\n1 0\n2 0 1\n2\n0.2 0.8\n4\n0.1 0.8\n0.7 0.3\n";
        assert!(matches!(parse_uai(bad), Err(Error::Unnormalized { var: 1, .. })));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_uai("MARKOV 1 2 1 1 0 2 .5 .5"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_uai("BAYES\n1\n0\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(
            parse_uai("BAYES\n1\n2\n1\n1 0\n3\n0.5 0.5 0\n"),
            Err(Error::Parse { line: 6, .. })
        ));
        let cyclic = "BAYES 2 2 2 2 2 1 0 2 0 1 4 .5 .5 .5 .5 4 .5 .5 .5 .5";
        assert!(matches!(parse_uai(cyclic), Err(Error::Cyclic { .. })));
        assert!(matches!(parse_uai("BAYES 1 2 1 1 0 2 0.5"), Err(Error::Parse { .. })));
    }

    #[test]
    fn evidence_parsing() {
        let net = two_node();
        assert_eq!(
            parse_evidence("1 1 0", &net).unwrap(),
            Instantiation::from_pairs([(1, 0)])
        );
        assert!(parse_evidence("0", &net).unwrap().is_empty());
        assert!(matches!(
            parse_evidence("1 0 5", &net),
            Err(Error::ValueOutOfRange { var: 0, value: 5, .. })
        ));
        assert!(matches!(
            parse_evidence("1 9 0", &net),
            Err(Error::VariableOutOfRange { var: 9, .. })
        ));
        assert!(matches!(
            parse_evidence("2 1 0 1 1", &net),
            Err(Error::DuplicateVariable { var: 1 })
        ));
    }

    #[test]
    fn evidence_round_trip() {
        let net = two_node();
        let e = Instantiation::from_pairs([(0, 1), (1, 0)]);
        assert_eq!(parse_evidence(&serialize_evidence(&e), &net).unwrap(), e);
    }
}
