//! Squashing and routing-by-agreement on random prediction vectors.
use aggrnet::nn::{dynamic_routing, squash};
use aggrnet::tensor::{l2_norm, Init, Tensor};
use aggrnet::Rng;

fn main() {
    for s in [vec![0.1, 0.0], vec![1.0, 0.0], vec![3.0, 4.0], vec![100.0, 0.0]] {
        let v = squash(&s);
        println!("|s| = {:>7.3}  ->  |v| = {:.4}", l2_norm(&Tensor::from_vec(s)), l2_norm(&Tensor::from_vec(v)));
    }

    // 6 input capsules voting for 3 output capsules of dim 4. Inputs 0-3
    // agree on output 0; the rest are noise.
    let mut rng = Rng::new(5);
    let mut u_hat = Tensor::create(&[6, 3, 4], Init::Uniform { lo: -0.2, hi: 0.2, rng: &mut rng }).unwrap();
    let consensus = [0.8, -0.5, 0.3, 0.1];
    for i in 0..4 {
        let start = i * 12;
        u_hat.data_mut()[start..start + 4].copy_from_slice(&consensus);
    }

    for iters in [1, 3] {
        let (v, state) = dynamic_routing(&u_hat, iters).unwrap();
        println!("\n{iters} routing iteration(s)");
        for j in 0..3 {
            let out = &v.data()[j * 4..(j + 1) * 4];
            println!("  output {j}: |v| = {:.3}", out.iter().map(|x| x * x).sum::<f64>().sqrt());
        }
        for i in 0..6 {
            let c = state.couplings.row(i);
            println!("  c[{i}] = [{:.3}, {:.3}, {:.3}]", c[0], c[1], c[2]);
        }
    }
}
