//! Save a model as XML, validate it against the schema and load it back.

use topoflow::fixtures;
use topoflow::persistence::{load_file, save_file, save_xml, validate_schema};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = fixtures::balls();
    let text = save_xml(&m);
    print!("{text}");
    validate_schema(&text).map_err(|errs| format!("{errs:?}"))?;

    let dir = std::env::temp_dir().join("topoflow-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("balls.topo.xml");
    save_file(&m, &path)?;
    let back = load_file(&path)?;
    println!("roundtrip equal: {}", back == m);
    Ok(())
}
