//! Generate a chain, write it as JSON and read it back bit for bit.

use gmt_epi::generate::{generate, GenKind};
use gmt_epi::io::ChainFile;

fn main() -> gmt_epi::Result<()> {
    let g = generate(
        &GenKind::ConeHarmonic {
            k: 2,
            amplitude: 0.05,
            rays: 64,
            extent: 2.5,
        },
        0,
    )?;
    let file = ChainFile::from_chain(&g.chain, g.metadata);
    let path = std::env::temp_dir().join("gmt_epi_cone.json");
    file.write(&path)?;
    let back = ChainFile::read(&path)?.to_chain()?;
    println!(
        "wrote {} ({} simplices), identical after reading: {}",
        path.display(),
        back.len(),
        back == g.chain
    );
    println!("metadata: {}", file.metadata);
    Ok(())
}
