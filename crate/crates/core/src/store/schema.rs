use serde::{Deserialize, Serialize};

pub const REGION: &str = "REGION";
pub const AGE: &str = "AGE";
pub const NATIONAL_FOREIGN: &str = "NATIONAL_FOREIGN";
pub const INEI_SCOPE: &str = "INEI_SCOPE";
pub const INSURANCE_PLAN: &str = "INSURANCE_PLAN";
pub const TOTAL_AFFILIATES: &str = "TOTAL_AFFILIATES";

/// The six variables of the affiliate table, in canonical output order.
pub const CANONICAL_COLUMNS: [&str; 6] = [REGION, AGE, NATIONAL_FOREIGN, INEI_SCOPE, INSURANCE_PLAN, TOTAL_AFFILIATES];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Categorical,
    NonnegativeInteger,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub aliases: Vec<String>,
    pub required: bool,
}

impl ColumnSchema {
    pub fn new(name: &str, kind: ColumnKind, aliases: &[&str]) -> Self {
        Self { name: name.to_string(), kind, aliases: aliases.iter().map(|a| a.to_string()).collect(), required: true }
    }

    /// Whether a raw header cell names this column.
    pub fn matches(&self, header: &str) -> bool {
        let key = normalize_name(header);
        normalize_name(&self.name) == key || self.aliases.iter().any(|a| normalize_name(a) == key)
    }

    /// Schema of the public SIS active-affiliate export. Aliases cover the
    /// English dictionary names and the Spanish headers of the open-data
    /// platform.
    pub fn sis_default() -> Vec<ColumnSchema> {
        use ColumnKind::*;
        vec![
            ColumnSchema::new(
                REGION,
                Categorical,
                &["REGION DE RESIDENCIA", "REGION_RESIDENCIA", "DEPARTAMENTO", "REGION OF RESIDENCE"],
            ),
            ColumnSchema::new(AGE, NonnegativeInteger, &["EDAD", "EDAD_ACTUAL"]),
            ColumnSchema::new(
                NATIONAL_FOREIGN,
                Categorical,
                &["NACIONAL_EXTRANJERO", "NACIONAL EXTRANJERO", "NACIONALIDAD", "NATIONAL FOREIGN", "FOREIGN_NATIONAL"],
            ),
            ColumnSchema::new(
                INEI_SCOPE,
                Categorical,
                &["AMBITO_INEI", "AMBITO INEI", "SCOPE_INEI", "SCOPE INEI", "AMBITO"],
            ),
            ColumnSchema::new(
                INSURANCE_PLAN,
                Categorical,
                &["PLAN_DE_SEGURO", "PLAN DE SEGURO", "PLAN_SEGURO", "PLAN"],
            ),
            ColumnSchema::new(
                TOTAL_AFFILIATES,
                NonnegativeInteger,
                &["TOTAL_AFILIADOS", "TOTAL AFILIADOS", "TOTAL_OF_AFFILIATES", "TOTAL OF AFFILIATES", "TOTAL"],
            ),
        ]
    }
}

/// Replaces Latin-1 accented letters with their base letter.
pub fn fold_accents(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            'á' | 'à' | 'â' | 'ä' | 'ã' => 'a',
            'Á' | 'À' | 'Â' | 'Ä' | 'Ã' => 'A',
            'é' | 'è' | 'ê' | 'ë' => 'e',
            'É' | 'È' | 'Ê' | 'Ë' => 'E',
            'í' | 'ì' | 'î' | 'ï' => 'i',
            'Í' | 'Ì' | 'Î' | 'Ï' => 'I',
            'ó' | 'ò' | 'ô' | 'ö' | 'õ' => 'o',
            'Ó' | 'Ò' | 'Ô' | 'Ö' | 'Õ' => 'O',
            'ú' | 'ù' | 'û' | 'ü' => 'u',
            'Ú' | 'Ù' | 'Û' | 'Ü' => 'U',
            'ñ' => 'n',
            'Ñ' => 'N',
            'ç' => 'c',
            'Ç' => 'C',
            other => other,
        })
        .collect()
}

/// Header/lookup key: trimmed, accent-folded, upper-cased, with every run of
/// non-alphanumeric characters collapsed to a single underscore.
pub fn normalize_name(raw: &str) -> String {
    let folded = fold_accents(raw.trim()).to_uppercase();
    let mut out = String::with_capacity(folded.len());
    let mut pending_sep = false;
    for c in folded.chars() {
        if c.is_alphanumeric() {
            if pending_sep && !out.is_empty() {
                out.push('_');
            }
            pending_sep = false;
            out.push(c);
        } else {
            pending_sep = true;
        }
    }
    out
}
