//! Generates both synthetic families, writes one to CSV and reloads it.
//!
//! cargo run --example gen_data -- /tmp/dadg-data

use dadg::data::{generate_synthetic, load_csv_dataset, write_csv_dataset, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("dadg-data").display().to_string());
    for spec in [SyntheticSpec::rotated_moons(0), SyntheticSpec::spurious_shift(0)] {
        let ds = generate_synthetic(&spec)?;
        println!("{}: {} domains x {} examples, dim {}", spec.family.name(), ds.num_domains(), ds.domain(0).len(), ds.input_dim());
        for d in &spec.domains {
            if spec.family == dadg::data::Family::SpuriousShift {
                println!("  {:<9} cue/class correlation {:+.2}", d.name, d.correlation);
            }
        }
    }
    let ds = generate_synthetic(&SyntheticSpec::spurious_shift(0))?;
    write_csv_dataset(&ds, out.as_ref())?;
    let back = load_csv_dataset(out.as_ref())?;
    println!("wrote and reloaded {} ({:?})", out, back.domain_names());
    Ok(())
}
