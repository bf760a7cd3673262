//! Exact t-SNE on three separated Gaussian blobs.
//!
//! `cargo run --example tsne_blobs -- [out.csv]`

use microdoppler::tsne::{gaussian_blobs, silhouette, tsne, TsneConfig};

fn main() -> microdoppler::Result<()> {
    let (x, labels) = gaussian_blobs(3, 20, 50, 10.0, 5);
    let cfg = TsneConfig { perplexity: 10.0, ..Default::default() };
    let emb = tsne(&x, &cfg)?;
    let trace = &emb.kl_trace;
    println!(
        "KL after exaggeration {:.4}, final {:.4}, silhouette {:.3}",
        trace[cfg.exaggeration_iterations],
        trace[trace.len() - 1],
        silhouette(&emb.coords(), &labels)
    );
    if let Some(path) = std::env::args().nth(1) {
        emb.write_csv(path.as_ref())?;
        println!("wrote {path}");
    }
    Ok(())
}
