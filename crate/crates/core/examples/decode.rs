//! First-order projective decoding: the best tree, the partition function and
//! arc marginals for a small score matrix.
//!
//!     cargo run --example decode

use frparse::decoder::{arc_marginals, decode, log_partition, ScoreMatrix};

fn main() {
    // Two words. Row is the head, column the dependent; 0 is the root.
    let mut scores = ScoreMatrix::zeros(2);
    scores.set(0, 1, 1.0);
    scores.set(0, 2, 0.5);
    scores.set(1, 2, 2.0);
    scores.set(2, 1, 3.0);

    let best = decode(&scores);
    println!("best heads {:?}, score {}", best.tree.heads(), best.score);
    println!("log Z = {:.6}", log_partition(&scores));

    let marginals = arc_marginals(&scores);
    for h in 0..=2 {
        for d in 1..=2 {
            if h != d {
                println!("p({h} -> {d}) = {:.4}", marginals.get(h, d));
            }
        }
    }
}
