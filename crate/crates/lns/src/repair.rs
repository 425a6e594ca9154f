use pdpt_core::{apply_insertion, ranked_insertions, Instance, ReqId, Solution};
use rand::Rng;

/// Inserts `order` one request at a time at the cheapest feasible place,
/// skipping each feasible place with probability `blink`. When every place
/// is skipped the cheapest one is taken. Returns the first request that
/// cannot be placed at all.
pub fn repair(
    inst: &Instance,
    partial: &Solution,
    order: &[ReqId],
    blink: f64,
    rng: &mut impl Rng,
) -> Result<Solution, ReqId> {
    let mut sol = partial.clone();
    for &r in order {
        let chosen = {
            let mut ranked = ranked_insertions(inst, &sol, r, true);
            let cheapest = ranked.next().ok_or(r)?;
            if blink <= 0.0 || !rng.gen_bool(blink) {
                cheapest
            } else {
                ranked.find(|_| !rng.gen_bool(blink)).unwrap_or(cheapest)
            }
        };
        apply_insertion(inst, &mut sol, &chosen).expect("ranked candidates are feasible");
    }
    Ok(sol)
}
