//! Browser bindings for the static demo page in `www/`: canonicalization,
//! template application and template augmentation. Each call returns a
//! JSON string.

use serde_json::json;
use wasm_bindgen::prelude::*;

use brs_core::augment::{enumerate_variants, OpKind};
use brs_core::rxn::{apply, BrsRegistry, MatchMode};
use brs_core::{parse_smiles, write_canonical, Molecule};

fn molecules(list: &str) -> Result<Vec<Molecule>, String> {
    list.split(',')
        .map(|s| parse_smiles(s).map_err(|e| format!("'{}': {e}", s.trim())))
        .collect()
}

pub fn canonicalize_json(smiles: &str) -> Result<String, String> {
    let m = parse_smiles(smiles).map_err(|e| e.to_string())?;
    Ok(json!({ "canonical": write_canonical(&m) }).to_string())
}

pub fn apply_json(template: &str, reactants: &str, inter: bool) -> Result<String, String> {
    let rxn = BrsRegistry::builtin().resolve(template).map_err(|e| e.to_string())?;
    let mode = if inter { MatchMode::Inter } else { MatchMode::Intra };
    let products = apply(&rxn, &molecules(reactants)?, mode).map_err(|e| e.to_string())?;
    let products: Vec<_> = products
        .iter()
        .map(|p| json!({ "smiles": p.smiles, "discarded": p.discarded }))
        .collect();
    Ok(json!({ "template": rxn.to_string(), "products": products }).to_string())
}

pub fn augment_json(template: &str, ops: &str, max: usize, seed: u64) -> Result<String, String> {
    let base_id = template.trim().parse::<usize>().ok();
    let rxn = BrsRegistry::builtin().resolve(template).map_err(|e| e.to_string())?;
    let ops = OpKind::parse_list(ops)?;
    let variants: Vec<_> = enumerate_variants(base_id, &rxn, &ops, max, seed)
        .iter()
        .map(|v| json!({ "ops": v.signature(), "class": v.class().name(), "smarts": v.provenance_text }))
        .collect();
    Ok(json!({ "base": rxn.to_string(), "variants": variants }).to_string())
}

#[wasm_bindgen]
pub fn canonicalize(smiles: &str) -> Result<String, JsError> {
    canonicalize_json(smiles).map_err(|e| JsError::new(&e))
}

/// `reactants` is a comma-separated SMILES list.
#[wasm_bindgen]
pub fn apply_template(template: &str, reactants: &str, inter: bool) -> Result<String, JsError> {
    apply_json(template, reactants, inter).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn augment(template: &str, ops: &str, max: u32, seed: u32) -> Result<String, JsError> {
    augment_json(template, ops, max as usize, seed as u64).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shapes() {
        assert_eq!(canonicalize_json("OCC").unwrap(), r#"{"canonical":"CCO"}"#);
        assert!(canonicalize_json("C((").is_err());
        let v: serde_json::Value = serde_json::from_str(&apply_json("2", "CCO", false).unwrap()).unwrap();
        assert_eq!(v["products"][0]["smiles"], "C=CO");
        let v: serde_json::Value = serde_json::from_str(&augment_json("2", "comb", 2, 0).unwrap()).unwrap();
        assert_eq!(v["variants"].as_array().unwrap().len(), 2);
        assert!(augment_json("2", "bad", 2, 0).is_err());
    }
}
