fn main() {
    let t = std::time::Instant::now();
    for r in upset_poincare::walk::scaling_experiment(&[3,5,7,9,11,13], 0.5, 0.25).unwrap() {
        println!("{r:?} {:?}", t.elapsed());
    }
}
