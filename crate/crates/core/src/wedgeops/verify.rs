//! Operator identities checked state by state.

use std::sync::Arc;

use serde::Serialize;

use super::{apply, basis_up_to, WedgeOperator};
use crate::error::Result;
use crate::exactseries::{inv_varsigma, q, varsigma, Coeff, Rational, SeriesElement, SeriesRing};
use crate::fock::{inner, FockVector, Partition};

type Series = SeriesElement<Rational>;

/// Outcome of an identity on one basis state.
#[derive(Clone, Debug, Serialize)]
pub struct StateReport {
    pub state: Partition,
    pub pass: bool,
}

pub fn all_pass(r: &[StateReport]) -> bool {
    r.iter().all(|s| s.pass)
}

fn vectors_agree(a: &FockVector<Series>, b: &FockVector<Series>, trunc: &[i64]) -> bool {
    let d = a.sub(b);
    d.entries().values().all(|c| {
        let t = c.truncate(trunc);
        t.require_prec(trunc).is_ok() && t.terms().is_empty()
    })
}

/// `[E_j(z), E_k(w)] = ς(jw - kz) E_{j+k}(z+w)` on every basis state of
/// energy at most `cap`, to order `order` in `z` and `w`.
pub fn verify_commutation(j: i64, k: i64, order: i64, cap: u64) -> Result<Vec<StateReport>> {
    let trunc = [order, order];
    let ring = SeriesRing::new(&["z", "w"], &trunc)?
        .with_poles("z", i64::from(j == 0))?
        .with_poles("w", i64::from(k == 0))?;
    let ring = Arc::new(ring);
    let ez = WedgeOperator::<Series>::e_series(j, "z", &ring)?;
    let ew = WedgeOperator::<Series>::e_series(k, "w", &ring)?;
    let vars = ring.vars().clone();
    let wp = ring.working_prec();
    let big = 2 * order + 4;
    let sig = varsigma::<Rational>("x", &q(1), big).compose_linear(&vars, &wp, &[vec![q(-k), q(j)]])?;
    let sum_form = vec![q(1), q(1)];
    let rhs_e = WedgeOperator::ESeries { j: j + k, form: sum_form.clone(), ring: ring.clone(), delta: false };
    let scalar = if j + k == 0 && j != 0 {
        let ratio = varsigma::<Rational>("x", &q(j), big + 1).try_mul(&inv_varsigma("x", &q(1), big)?)?;
        Some(ratio.compose_linear(&vars, &wp, &[sum_form])?)
    } else {
        None
    };
    let reach = cap + j.unsigned_abs() + k.unsigned_abs();
    let mut out = Vec::new();
    for (l, v) in basis_up_to::<Series>(cap) {
        let a = apply(&ez, &apply(&ew, &v, reach)?, reach)?;
        let b = apply(&ew, &apply(&ez, &v, reach)?, reach)?;
        let lhs = a.sub(&b);
        let mut rhs = apply(&rhs_e, &v, reach)?.scale_c(&sig);
        if let Some(s) = &scalar {
            rhs = rhs.add(&v.scale_c(s));
        }
        out.push(StateReport { state: l, pass: vectors_agree(&lhs, &rhs, &trunc) });
    }
    Ok(out)
}

fn check_rational_identity(
    lhs: &WedgeOperator<Rational>,
    rhs: &WedgeOperator<Rational>,
    cap: u64,
    reach: u64,
) -> Result<Vec<StateReport>> {
    let mut out = Vec::new();
    for (l, v) in basis_up_to::<Rational>(cap) {
        let a = apply(lhs, &v, reach)?;
        let b = apply(rhs, &v, reach)?;
        out.push(StateReport { state: l, pass: a == b });
    }
    Ok(out)
}

/// `[α_j, α_k] = j δ_{j,-k}` on states of energy at most `cap`.
pub fn verify_alpha_commutation(j: i64, k: i64, cap: u64) -> Result<Vec<StateReport>> {
    let lhs = WedgeOperator::commutator(WedgeOperator::Alpha(j), WedgeOperator::Alpha(k));
    let c = if j + k == 0 { q(j) } else { q(0) };
    let rhs = WedgeOperator::scaled_q(c, WedgeOperator::identity());
    check_rational_identity(&lhs, &rhs, cap, cap + j.unsigned_abs() + k.unsigned_abs())
}

/// `[α_j, E_k[0]] = j α_{j+k}`, with the charge (zero here) when `j+k = 0`.
pub fn verify_alpha_ecoeff(j: i64, k: i64, cap: u64) -> Result<Vec<StateReport>> {
    let lhs = WedgeOperator::commutator(WedgeOperator::Alpha(j), WedgeOperator::ECoeff(k, 0));
    let rhs = WedgeOperator::scaled_q(q(j), WedgeOperator::Alpha(j + k));
    check_rational_identity(&lhs, &rhs, cap, cap + j.unsigned_abs() + k.unsigned_abs())
}

/// `⟨op v_λ, v_μ⟩ = ⟨v_λ, op^* v_μ⟩` for all basis pairs up to `cap`.
pub fn verify_adjointness<C: Coeff>(op: &WedgeOperator<C>, cap: u64) -> Result<bool> {
    let adj = op.adjoint();
    let basis = basis_up_to::<C>(cap);
    let reach = cap + 8;
    let images: Vec<FockVector<C>> = basis.iter().map(|(_, v)| apply(op, v, reach)).collect::<Result<_>>()?;
    let adj_images: Vec<FockVector<C>> = basis.iter().map(|(_, v)| apply(&adj, v, reach)).collect::<Result<_>>()?;
    for (i, (_, v)) in basis.iter().enumerate() {
        for (jx, (_, w)) in basis.iter().enumerate() {
            if inner(&images[i], w) != inner(v, &adj_images[jx]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
