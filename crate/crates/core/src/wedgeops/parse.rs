//! Prefix syntax for operator expressions.
//!
//! ```text
//! (* (alpha 1) (E 0 z) (alpha -1))
//! (+ (Ek 0 1) (scale 1/2 (H)))
//! ```
//!
//! Heads: `alpha j`, `E j form`, `Ek j k`, `H`, `P l`, `exp c m`,
//! `scale c op`, `*`, `+`, `adj op`, `comm a b`. A form is a sum such as
//! `z`, `2*z`, `z+w` or `z-w`.

use std::sync::Arc;

use num_traits::Zero;

use super::WedgeOperator;
use crate::error::{Error, Result};
use crate::exactseries::{rational, Coeff, Rational, SeriesRing};

#[derive(Debug, Clone)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(s: &str) -> Vec<String> {
    s.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(str::to_string).collect()
}

fn read(tokens: &[String], pos: &mut usize) -> Result<Sexp> {
    let t = tokens.get(*pos).ok_or_else(|| Error::Parse("unexpected end of expression".into()))?;
    *pos += 1;
    match t.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    None => return Err(Error::Parse("missing )".into())),
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    _ => items.push(read(tokens, pos)?),
                }
            }
        }
        ")" => Err(Error::Parse("unexpected )".into())),
        _ => Ok(Sexp::Atom(t.clone())),
    }
}

fn parse_form(s: &str) -> Result<Vec<(String, Rational)>> {
    let mut out = Vec::new();
    let s = s.replace('-', "+-");
    for term in s.split('+').filter(|t| !t.is_empty()) {
        let (neg, body) = match term.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, term),
        };
        let (c, v) = match body.split_once('*') {
            Some((c, v)) => (rational::parse(c)?, v),
            None => {
                let split = body.find(|ch: char| ch.is_alphabetic()).unwrap_or(0);
                let c = if split == 0 { Rational::from_integer(1.into()) } else { rational::parse(&body[..split])? };
                (c, &body[split..])
            }
        };
        if v.is_empty() || !v.chars().all(|ch| ch.is_alphanumeric() || ch == '_') {
            return Err(Error::Parse(format!("bad linear form term {term:?}")));
        }
        out.push((v.to_string(), if neg { -c } else { c }));
    }
    if out.is_empty() {
        return Err(Error::Parse(format!("empty linear form {s:?}")));
    }
    Ok(out)
}

fn collect_vars(e: &Sexp, vars: &mut Vec<String>, poles: &mut Vec<i64>) -> Result<()> {
    if let Sexp::List(items) = e {
        if let Some(Sexp::Atom(h)) = items.first() {
            if h == "E" {
                if let (Some(Sexp::Atom(j)), Some(Sexp::Atom(f))) = (items.get(1), items.get(2)) {
                    for (v, _) in parse_form(f)? {
                        if !vars.contains(&v) {
                            vars.push(v.clone());
                            poles.push(0);
                        }
                        if j == "0" {
                            let i = vars.iter().position(|x| *x == v).expect("just inserted");
                            poles[i] += 1;
                        }
                    }
                }
            }
        }
        for it in items {
            collect_vars(it, vars, poles)?;
        }
    }
    Ok(())
}

fn atom<'a>(items: &'a [Sexp], i: usize, what: &str) -> Result<&'a str> {
    match items.get(i) {
        Some(Sexp::Atom(a)) => Ok(a),
        _ => Err(Error::Parse(format!("expected {what}"))),
    }
}

fn int(items: &[Sexp], i: usize, what: &str) -> Result<i64> {
    atom(items, i, what)?
        .parse()
        .map_err(|_| Error::Parse(format!("expected integer {what}")))
}

fn arity(items: &[Sexp], n: usize, head: &str) -> Result<()> {
    if items.len() != n + 1 {
        return Err(Error::Parse(format!("{head} takes {n} argument(s)")));
    }
    Ok(())
}

fn build<C: Coeff>(e: &Sexp, ring: &Arc<SeriesRing>) -> Result<WedgeOperator<C>> {
    let items = match e {
        Sexp::List(items) => items,
        Sexp::Atom(a) => return Err(Error::Parse(format!("expected an operator, found {a:?}"))),
    };
    let head = atom(items, 0, "operator head")?;
    let sub = |i: usize| build::<C>(&items[i], ring);
    Ok(match head {
        "alpha" => {
            arity(items, 1, head)?;
            WedgeOperator::Alpha(int(items, 1, "mode")?)
        }
        "E" => {
            arity(items, 2, head)?;
            let j = int(items, 1, "index")?;
            let mut form = vec![Rational::zero(); ring.len()];
            for (v, c) in parse_form(atom(items, 2, "linear form")?)? {
                form[ring.index(&v)?] += c;
            }
            WedgeOperator::ESeries { j, form, ring: ring.clone(), delta: true }
        }
        "Ek" => {
            arity(items, 2, head)?;
            let k = int(items, 2, "coefficient index")?;
            if k < -1 {
                return Err(Error::Parse("Ek needs k >= -1".into()));
            }
            WedgeOperator::ECoeff(int(items, 1, "index")?, k)
        }
        "H" => {
            arity(items, 0, head)?;
            WedgeOperator::Energy
        }
        "P" => {
            arity(items, 1, head)?;
            let l = int(items, 1, "energy")?;
            if l < 0 {
                return Err(Error::Parse("P needs a nonnegative energy".into()));
            }
            WedgeOperator::Project(l as u64)
        }
        "exp" => {
            arity(items, 2, head)?;
            let c = rational::parse(atom(items, 1, "coefficient")?)?;
            WedgeOperator::ExpAlpha(C::from_rational(&c), int(items, 2, "mode")?)
        }
        "scale" => {
            arity(items, 2, head)?;
            let c = rational::parse(atom(items, 1, "coefficient")?)?;
            WedgeOperator::scaled_q(c, sub(2)?)
        }
        "adj" => {
            arity(items, 1, head)?;
            sub(1)?.adjoint()
        }
        "comm" => {
            arity(items, 2, head)?;
            WedgeOperator::commutator(sub(1)?, sub(2)?)
        }
        "*" => WedgeOperator::Product((1..items.len()).map(sub).collect::<Result<_>>()?),
        "+" => WedgeOperator::Sum((1..items.len()).map(sub).collect::<Result<_>>()?),
        other => return Err(Error::Parse(format!("unknown operator head {other:?}"))),
    })
}

/// Parse an operator expression. Series variables are declared in order of
/// first appearance with truncation `order` and one order of pole slack per
/// `E_0` factor in that variable.
pub fn parse_operator<C: Coeff>(text: &str, order: i64) -> Result<(WedgeOperator<C>, Arc<SeriesRing>)> {
    let tokens = tokenize(text);
    let mut pos = 0;
    let e = read(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(Error::Parse("trailing input after expression".into()));
    }
    let mut vars = Vec::new();
    let mut poles = Vec::new();
    collect_vars(&e, &mut vars, &mut poles)?;
    let names: Vec<&str> = vars.iter().map(String::as_str).collect();
    let mut ring = SeriesRing::new(&names, &vec![order; names.len()])?;
    for (v, p) in vars.iter().zip(&poles) {
        ring = ring.with_poles(v, *p)?;
    }
    let ring = Arc::new(ring);
    Ok((build(&e, &ring)?, ring))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        let f = parse_form("2*z-w").unwrap();
        assert_eq!(f[0], ("z".to_string(), rational::q(2)));
        assert_eq!(f[1], ("w".to_string(), rational::q(-1)));
        let f = parse_form("3z").unwrap();
        assert_eq!(f[0], ("z".to_string(), rational::q(3)));
        assert!(parse_form("2*").is_err());
    }

    #[test]
    fn nested() {
        let (op, ring) = parse_operator::<Rational>("(* (alpha 1) (+ (Ek 0 0) (H)) (alpha -1))", 3).unwrap();
        assert!(ring.is_empty());
        assert_eq!(op.to_string(), "(* (alpha 1) (+ (Ek 0 0) (H)) (alpha -1))");
        assert!(parse_operator::<Rational>("(* (alpha 1)", 3).is_err());
        assert!(parse_operator::<Rational>("(foo 1)", 3).is_err());
    }
}
