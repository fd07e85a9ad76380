//! Loading of the bundled contribution tables and rule files.

use super::qed::{AdsParams, QedParams, QED_PROPERTIES};
use super::DescriptorError;
use crate::smarts::Pattern;
use std::path::Path;
use std::sync::OnceLock;

pub(crate) struct CrippenRow {
    pub kind: String,
    pub pattern: Pattern,
    pub value: f64,
}

pub(crate) struct TpsaRow {
    pub element: u8,
    /// heavy degree, H, single, double, triple, aromatic
    pub counts: [u8; 6],
    pub charge: i8,
    pub ring3: Option<bool>,
    pub value: f64,
}

pub(crate) struct TpsaFallback {
    pub element: u8,
    pub base: f64,
    pub per_neighbor: f64,
    pub per_h: f64,
}

/// Every table the descriptor vector needs. Immutable once loaded and safe
/// to share across threads.
pub struct DescriptorTables {
    pub(crate) crippen_heavy: Vec<CrippenRow>,
    pub(crate) crippen_h: Vec<CrippenRow>,
    pub(crate) tpsa: Vec<TpsaRow>,
    pub(crate) tpsa_fallback: Vec<TpsaFallback>,
    pub(crate) hba: Vec<Pattern>,
    pub(crate) hbd: Pattern,
    pub(crate) rotatable: Pattern,
    pub(crate) aliphatic_ring_attachment: Pattern,
    pub(crate) alerts: Vec<Pattern>,
    pub qed: QedParams,
}

pub const CRIPPEN_FILE: &str = "crippen.tsv";
pub const TPSA_FILE: &str = "tpsa.tsv";
pub const RULES_FILE: &str = "descriptor_rules.tsv";
pub const HBA_FILE: &str = "hba_patterns.txt";
pub const ALERTS_FILE: &str = "qed_alerts.txt";
pub const QED_PARAMS_FILE: &str = "qed_params.tsv";

/// Raw text of each table, keyed like the files in `data/`.
pub struct TableSources<'a> {
    pub crippen: &'a str,
    pub tpsa: &'a str,
    pub rules: &'a str,
    pub hba: &'a str,
    pub alerts: &'a str,
    pub qed_params: &'a str,
}

const BUNDLED: TableSources<'static> = TableSources {
    crippen: include_str!("../../data/crippen.tsv"),
    tpsa: include_str!("../../data/tpsa.tsv"),
    rules: include_str!("../../data/descriptor_rules.tsv"),
    hba: include_str!("../../data/hba_patterns.txt"),
    alerts: include_str!("../../data/qed_alerts.txt"),
    qed_params: include_str!("../../data/qed_params.tsv"),
};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn table_err(file: &str, line: usize, message: impl Into<String>) -> DescriptorError {
    DescriptorError::Table { file: file.to_string(), line, message: message.into() }
}

fn pattern(file: &str, line: usize, text: &str) -> Result<Pattern, DescriptorError> {
    Pattern::parse(text).map_err(|e| table_err(file, line, e.to_string()))
}

fn number<T: std::str::FromStr>(file: &str, line: usize, text: &str) -> Result<T, DescriptorError> {
    text.trim().parse().map_err(|_| table_err(file, line, format!("bad number '{text}'")))
}

impl DescriptorTables {
    /// Tables compiled into the binary, parsed once per process.
    pub fn bundled() -> &'static DescriptorTables {
        static TABLES: OnceLock<DescriptorTables> = OnceLock::new();
        TABLES.get_or_init(|| DescriptorTables::from_sources(&BUNDLED).expect("bundled tables are well-formed"))
    }

    /// Loads the six table files from a directory using the bundled file names.
    pub fn from_dir(dir: &Path) -> Result<DescriptorTables, DescriptorError> {
        let read = |name: &str| std::fs::read_to_string(dir.join(name));
        let (crippen, tpsa, rules) = (read(CRIPPEN_FILE)?, read(TPSA_FILE)?, read(RULES_FILE)?);
        let (hba, alerts, qed_params) = (read(HBA_FILE)?, read(ALERTS_FILE)?, read(QED_PARAMS_FILE)?);
        DescriptorTables::from_sources(&TableSources {
            crippen: &crippen,
            tpsa: &tpsa,
            rules: &rules,
            hba: &hba,
            alerts: &alerts,
            qed_params: &qed_params,
        })
    }

    pub fn from_sources(src: &TableSources) -> Result<DescriptorTables, DescriptorError> {
        let mut crippen_heavy = Vec::new();
        let mut crippen_h = Vec::new();
        for (n, line) in content_lines(src.crippen) {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() < 3 {
                return Err(table_err(CRIPPEN_FILE, n, "expected type, SMARTS, value"));
            }
            let row = CrippenRow {
                kind: f[0].to_string(),
                pattern: pattern(CRIPPEN_FILE, n, f[1])?,
                value: number(CRIPPEN_FILE, n, f[2])?,
            };
            // H1..H4 and HS type hydrogens; "Hal" is a heavy-atom type
            if matches!(row.kind.as_str(), "H1" | "H2" | "H3" | "H4" | "HS") {
                crippen_h.push(row);
            } else {
                crippen_heavy.push(row);
            }
        }

        let mut tpsa = Vec::new();
        let mut tpsa_fallback = Vec::new();
        for (n, line) in content_lines(src.tpsa) {
            let f: Vec<&str> = line.split('\t').collect();
            if f[0] == "fallback" {
                if f.len() != 5 {
                    return Err(table_err(TPSA_FILE, n, "fallback rows have 5 fields"));
                }
                tpsa_fallback.push(TpsaFallback {
                    element: element_z(TPSA_FILE, n, f[1])?,
                    base: number(TPSA_FILE, n, f[2])?,
                    per_neighbor: number(TPSA_FILE, n, f[3])?,
                    per_h: number(TPSA_FILE, n, f[4])?,
                });
                continue;
            }
            if f.len() != 10 {
                return Err(table_err(TPSA_FILE, n, "expected 10 fields"));
            }
            let mut counts = [0u8; 6];
            for (c, text) in counts.iter_mut().zip(&f[1..7]) {
                *c = number(TPSA_FILE, n, text)?;
            }
            let ring3 = match f[8] {
                "*" => None,
                "0" => Some(false),
                "1" => Some(true),
                other => return Err(table_err(TPSA_FILE, n, format!("bad ring3 flag '{other}'"))),
            };
            tpsa.push(TpsaRow {
                element: element_z(TPSA_FILE, n, f[0])?,
                counts,
                charge: number(TPSA_FILE, n, f[7])?,
                ring3,
                value: number(TPSA_FILE, n, f[9])?,
            });
        }

        let mut rules = std::collections::HashMap::new();
        for (n, line) in content_lines(src.rules) {
            let (name, smarts) = line
                .split_once('\t')
                .ok_or_else(|| table_err(RULES_FILE, n, "expected name<TAB>SMARTS"))?;
            rules.insert(name.to_string(), pattern(RULES_FILE, n, smarts.trim())?);
        }
        let mut take = |name: &str| {
            rules.remove(name).ok_or_else(|| table_err(RULES_FILE, 0, format!("missing rule '{name}'")))
        };
        let hbd = take("hbd")?;
        let rotatable = take("rotatable")?;
        let aliphatic_ring_attachment = take("aliphatic_ring_attachment")?;

        let patterns = |file: &str, text: &str| -> Result<Vec<Pattern>, DescriptorError> {
            content_lines(text).map(|(n, l)| pattern(file, n, l.trim())).collect()
        };
        let hba = patterns(HBA_FILE, src.hba)?;
        let alerts = patterns(ALERTS_FILE, src.alerts)?;

        let mut found: Vec<Option<(AdsParams, f64)>> = vec![None; QED_PROPERTIES.len()];
        for (n, line) in content_lines(src.qed_params) {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 9 {
                return Err(table_err(QED_PARAMS_FILE, n, "expected property, a..f, dmax, weight"));
            }
            let idx = QED_PROPERTIES
                .iter()
                .position(|p| *p == f[0])
                .ok_or_else(|| table_err(QED_PARAMS_FILE, n, format!("unknown property '{}'", f[0])))?;
            let v: Vec<f64> = f[1..].iter().map(|t| number(QED_PARAMS_FILE, n, t)).collect::<Result<_, _>>()?;
            let ads = AdsParams { a: v[0], b: v[1], c: v[2], d: v[3], e: v[4], f: v[5], dmax: v[6] };
            if ads.dmax <= 0.0 || ads.e <= 0.0 || ads.f <= 0.0 {
                return Err(table_err(QED_PARAMS_FILE, n, "dmax, e and f must be positive"));
            }
            found[idx] = Some((ads, v[7]));
        }
        let mut props = Vec::with_capacity(found.len());
        for (name, p) in QED_PROPERTIES.iter().zip(found) {
            props.push(p.ok_or_else(|| table_err(QED_PARAMS_FILE, 0, format!("missing property '{name}'")))?);
        }
        let qed = QedParams::new(props.try_into().expect("one entry per property"));

        Ok(DescriptorTables {
            crippen_heavy,
            crippen_h,
            tpsa,
            tpsa_fallback,
            hba,
            hbd,
            rotatable,
            aliphatic_ring_attachment,
            alerts,
            qed,
        })
    }

    pub fn alert_count(&self) -> usize {
        self.alerts.len()
    }
}

fn element_z(file: &str, line: usize, symbol: &str) -> Result<u8, DescriptorError> {
    crate::molgraph::Element::from_symbol(symbol)
        .map(|e| e.atomic_number())
        .ok_or_else(|| table_err(file, line, format!("unknown element '{symbol}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_tables_load() {
        let t = DescriptorTables::bundled();
        assert!(t.crippen_heavy.len() > 60);
        assert_eq!(t.crippen_h.last().unwrap().kind, "HS");
        assert_eq!(t.hba.len(), 11);
        assert_eq!(t.alert_count(), 116);
        assert_eq!(t.tpsa_fallback.len(), 2);
    }

    #[test]
    fn reports_bad_rows() {
        let src = TableSources { crippen: "C1\t[CH4\t0.1\n", ..BUNDLED };
        let err = DescriptorTables::from_sources(&src).err().unwrap();
        assert!(err.to_string().starts_with("crippen.tsv:1:"), "{err}");
        let src = TableSources { rules: "hbd\t[OH]\n", ..BUNDLED };
        assert!(DescriptorTables::from_sources(&src).is_err());
    }
}
