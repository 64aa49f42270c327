//! Build specs in JSON: compose from a spec, serialize, reload.

use std::path::Path;

use autostack::interchange::{build_value, structure_from_json};

fn main() -> autostack::Result<()> {
    let spec = serde_json::json!({
        "combinator": "gog",
        "name": "trefoil-from-json",
        "vertices": ["u", "v"],
        "base_vertex": "u",
        "base": { "combinator": "zoo", "name": "Z-mod-2" },
        "edges": [{
            "name": "f", "from": "u", "to": "v", "tree": true,
            "forward": { "respecting": "zoo:Z-mod-3", "hat": [] },
            "backward": { "respecting": "zoo:Z-mod-2", "hat": [] }
        }]
    });
    // the two vertex groups use the same letter names, so this is refused
    match build_value(&spec, Path::new("")) {
        Err(e) => println!("refused: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }

    let rws = serde_json::json!({
        "combinator": "rws", "name": "klein", "generators": ["a", "b"], "free_cancellation": true,
        "rules": [["b a", "a^-1 b"], ["b a^-1", "a b"], ["b^-1 a", "a^-1 b^-1"], ["b^-1 a^-1", "a b^-1"]]
    });
    let s = build_value(&rws, Path::new(""))?.structure;
    let text = serde_json::to_string_pretty(&s.to_json())?;
    println!("{} serializes to {} bytes", s.name(), text.len());
    let back = structure_from_json(&serde_json::from_str(&text)?, Path::new(""))?;
    let w = s.alphabet().parse("b a b a")?;
    println!("reloaded: {} => {}", s.alphabet().render(&w), back.alphabet().render(&back.normal_form(&w, None)?));
    Ok(())
}
