use stein_expo::galton_watson::*;
use stein_expo::bounds::*;
use stein_expo::metrics::DistanceReport;
use stein_expo::{LawSpec, StreamKey};
fn main() {
    for m in [0.9, 0.95, 1.05] {
        for n in [10u32, 20, 50] {
            let t = std::time::Instant::now();
            let law = LawSpec::Geometric(m).build().unwrap();
            let d = coupling_draws(&law, n, 100_000, StreamKey::new(3)).unwrap();
            let w: Vec<f64> = d.iter().map(|x| x.w).collect();
            let dw = DistanceReport::from_values(w).unwrap().dw;
            let gap = d.iter().map(|x| x.gap).sum::<f64>() / 1e5;
            let b = gw_wasserstein_bound(&GwBoundInput::from_law(&law, n as u64).unwrap()).unwrap();
            println!("m={m} n={n} dw={dw:.4} gap={gap:.4} bound={:.4} surv={:.3e} {:?}", b.dw_bound, survival_probabilities(&law,n)[n as usize], t.elapsed());
        }
    }
}
