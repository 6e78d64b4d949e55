use crate::construction::gadgets_for;
use crate::presentation::equiv::presentations_equivalent_with;
use crate::promise::{check_cl2, check_cl3, closure, gluing_oracle_agrees};
use crate::tree_core::canon::Labels;

use super::{CheckEntry, Ctx, VerifyError};

/// Rounds of direct gluing compared against the closure.
pub const GLUING_ROUNDS: usize = 3;

/// The step's promise structure, rebuilt from the predecessor, closes to this state, and every
/// promise leaf carries its promised subtree with matching marker classes.
pub fn check_closure(ctx: &Ctx<'_>) -> Result<CheckEntry, VerifyError> {
    let e = CheckEntry::new("closure", "closure components keep every promise");
    let Some(prev) = ctx.prev else {
        return Ok(e.proved("the base case has no promises"));
    };
    let (_, kt, g) = gadgets_for(prev)?;
    let ps = &g.promises;
    let cr = closure(ps)?;
    for (i, (comp, mine)) in cr.components.iter().zip([&ctx.st.t, &ctx.st.s]).enumerate() {
        if !presentations_equivalent_with(comp, mine, Labels::Full)? {
            return Ok(e.failed("the stored tree is not the closure component", format!("component {i}")));
        }
    }
    let d = 3 * kt;
    let mut leaves = 0;
    for i in 0..ps.len() {
        for &l in &ps.leaf_sets[i] {
            leaves += 1;
            if !check_cl2(&cr, ps, i, l, d)? {
                return Ok(e.failed(format!("promise {i} fails at leaf {l} (shape)"), l.to_string()));
            }
            if !check_cl3(&cr, ps, i, l, d)? {
                return Ok(e.failed(format!("promise {i} fails at leaf {l} (colour classes)"), l.to_string()));
            }
        }
    }
    if !gluing_oracle_agrees(ps, &cr, GLUING_ROUNDS, d)? {
        return Ok(e.failed("direct gluing disagrees with the closure", format!("depth {d}")));
    }
    Ok(e.proved(format!(
        "{} promises, {leaves} promise leaves pass both bisimulation checks; direct gluing ({GLUING_ROUNDS} rounds) agrees at depth {d}",
        ps.len()
    )))
}
