use soscut::battery;
use soscut::rounding::*;
use std::time::Instant;

fn main() {
    let g = battery::random_graph(12, 0.5, 99);
    println!("n=12 graph with {} edges", g.num_edges());
    for cap in [2usize, 4] {
        let p = PipelineParams { degree_cap: cap, with_oracle: true, ..Default::default() };
        let t0 = Instant::now();
        let rep = vc_pipeline(&g, &p).unwrap();
        println!("vc d={cap}: {:?} obj*={:.4} obj={} opt={:?}", t0.elapsed(), rep.obj_star, rep.objective, rep.oracle_opt);
        let t0 = Instant::now();
        let rep = bs_pipeline(&g, &p).unwrap();
        println!("bs d={cap}: {:?} obj*={:.4} obj={} opt={:?}", t0.elapsed(), rep.obj_star, rep.objective, rep.oracle_opt);
        let t0 = Instant::now();
        let rep = uncut_pipeline(&g, &p).unwrap();
        println!("uncut d={cap}: {:?} obj*={:.4} obj={} opt={:?}", t0.elapsed(), rep.obj_star, rep.objective, rep.oracle_opt);
        let t0 = Instant::now();
        let rep = usc_pipeline(&g, &p).unwrap();
        println!("usc d={cap}: {:?} obj*={:.4} obj={:.4} opt={:?}", t0.elapsed(), rep.obj_star, rep.objective, rep.oracle_opt);
    }
}
