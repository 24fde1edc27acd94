use soscut::battery;
use soscut::sossolver::*;

fn main() {
    let g = battery::random_graph(12, 0.5, 99);
    let sys = build_vc_system(&g, 12.0);
    let params = SolveParams::with_degree(2);
    let mut trace = Vec::new();
    let out = solve_feasibility_traced(&sys, &params, None, Some(&mut trace)).unwrap();
    for (c, lv, me) in trace.iter().step_by(40).take(25) {
        println!("cycle {c:6}  lin {lv:.3e}  mineig {me:.3e}");
    }
    if let Some((c, lv, me)) = trace.last() {
        println!("last: cycle {c}  lin {lv:.3e}  mineig {me:.3e}");
    }
    match &out {
        SolveOutcome::Feasible(_) => println!("feasible"),
        other => println!("{other:?}"),
    }
}
