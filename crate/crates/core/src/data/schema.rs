//! Column registries for the supported CICFlowMeter export layouts.
//!
//! Names are matched after trimming whitespace and ignoring ASCII case.
//! Repeated header names are disambiguated the way pandas does it
//! (`Fwd Header Length`, `Fwd Header Length.1`), which is how the
//! CIC-DDoS2019 duplicate header column is usually seen.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DatasetKind {
    #[serde(rename = "cic-ddos2019")]
    CicDdos2019,
    #[serde(rename = "cse-cic-ids2018")]
    CseCicIds2018,
    /// Any CSV with a `Label` column; no registry check.
    #[serde(rename = "generic")]
    Generic,
}

impl DatasetKind {
    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::CicDdos2019 => "cic-ddos2019",
            DatasetKind::CseCicIds2018 => "cse-cic-ids2018",
            DatasetKind::Generic => "generic",
        }
    }

    /// Full expected header, in file order. Empty for [`DatasetKind::Generic`].
    pub fn registry(self) -> &'static [&'static str] {
        match self {
            DatasetKind::CicDdos2019 => CIC_DDOS2019_COLUMNS,
            DatasetKind::CseCicIds2018 => CSE_CIC_IDS2018_COLUMNS,
            DatasetKind::Generic => &[],
        }
    }

    /// Identifier columns that may be absent, or present beyond the registry.
    pub fn optional_columns(self) -> &'static [&'static str] {
        match self {
            DatasetKind::CicDdos2019 => &["Unnamed: 0"],
            DatasetKind::CseCicIds2018 => &["Flow ID", "Src IP", "Src Port", "Dst IP"],
            DatasetKind::Generic => &[],
        }
    }

    /// Non-informative identifier columns removed during preprocessing.
    pub fn drop_list(self) -> &'static [&'static str] {
        match self {
            DatasetKind::CicDdos2019 => &[
                "Unnamed: 0",
                "Flow ID",
                "Source IP",
                "Destination IP",
                "Timestamp",
                "SimillarHTTP",
            ],
            DatasetKind::CseCicIds2018 => &["Flow ID", "Src IP", "Src Port", "Dst IP", "Timestamp"],
            DatasetKind::Generic => &[],
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "cic-ddos2019" | "ddos2019" => Ok(DatasetKind::CicDdos2019),
            "cse-cic-ids2018" | "ids2018" => Ok(DatasetKind::CseCicIds2018),
            "generic" => Ok(DatasetKind::Generic),
            other => Err(Error::Usage(format!(
                "unknown dataset kind {other:?} (expected cic-ddos2019, cse-cic-ids2018 or generic)"
            ))),
        }
    }
}

pub const LABEL_COLUMN: &str = "Label";

/// Comparison key for column names.
pub fn column_key(name: &str) -> String {
    let k = name.trim().to_ascii_lowercase();
    // the dataset spells it "SimillarHTTP"; accept the dictionary spelling too
    if k == "similarhttp" {
        "simillarhttp".to_string()
    } else {
        k
    }
}

/// Trim header names and suffix repeats with `.1`, `.2`, ...
pub fn normalize_header<'a>(names: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut seen: std::collections::HashMap<String, usize> = Default::default();
    names
        .into_iter()
        .map(|raw| {
            let name = raw.trim().to_string();
            let n = seen.entry(column_key(&name)).or_insert(0);
            let out = if *n == 0 { name } else { format!("{name}.{n}") };
            *n += 1;
            out
        })
        .collect()
}

pub const CIC_DDOS2019_COLUMNS: &[&str] = &[
    "Unnamed: 0",
    "Flow ID",
    "Source IP",
    "Source Port",
    "Destination IP",
    "Destination Port",
    "Protocol",
    "Timestamp",
    "Flow Duration",
    "Total Fwd Packets",
    "Total Backward Packets",
    "Total Length of Fwd Packets",
    "Total Length of Bwd Packets",
    "Fwd Packet Length Max",
    "Fwd Packet Length Min",
    "Fwd Packet Length Mean",
    "Fwd Packet Length Std",
    "Bwd Packet Length Max",
    "Bwd Packet Length Min",
    "Bwd Packet Length Mean",
    "Bwd Packet Length Std",
    "Flow Bytes/s",
    "Flow Packets/s",
    "Flow IAT Mean",
    "Flow IAT Std",
    "Flow IAT Max",
    "Flow IAT Min",
    "Fwd IAT Total",
    "Fwd IAT Mean",
    "Fwd IAT Std",
    "Fwd IAT Max",
    "Fwd IAT Min",
    "Bwd IAT Total",
    "Bwd IAT Mean",
    "Bwd IAT Std",
    "Bwd IAT Max",
    "Bwd IAT Min",
    "Fwd PSH Flags",
    "Bwd PSH Flags",
    "Fwd URG Flags",
    "Bwd URG Flags",
    "Fwd Header Length",
    "Bwd Header Length",
    "Fwd Packets/s",
    "Bwd Packets/s",
    "Min Packet Length",
    "Max Packet Length",
    "Packet Length Mean",
    "Packet Length Std",
    "Packet Length Variance",
    "FIN Flag Count",
    "SYN Flag Count",
    "RST Flag Count",
    "PSH Flag Count",
    "ACK Flag Count",
    "URG Flag Count",
    "CWE Flag Count",
    "ECE Flag Count",
    "Down/Up Ratio",
    "Average Packet Size",
    "Avg Fwd Segment Size",
    "Avg Bwd Segment Size",
    "Fwd Header Length.1",
    "Fwd Avg Bytes/Bulk",
    "Fwd Avg Packets/Bulk",
    "Fwd Avg Bulk Rate",
    "Bwd Avg Bytes/Bulk",
    "Bwd Avg Packets/Bulk",
    "Bwd Avg Bulk Rate",
    "Subflow Fwd Packets",
    "Subflow Fwd Bytes",
    "Subflow Bwd Packets",
    "Subflow Bwd Bytes",
    "Init_Win_bytes_forward",
    "Init_Win_bytes_backward",
    "act_data_pkt_fwd",
    "min_seg_size_forward",
    "Active Mean",
    "Active Std",
    "Active Max",
    "Active Min",
    "Idle Mean",
    "Idle Std",
    "Idle Max",
    "Idle Min",
    "SimillarHTTP",
    "Inbound",
    "Label",
];

pub const CSE_CIC_IDS2018_COLUMNS: &[&str] = &[
    "Dst Port",
    "Protocol",
    "Timestamp",
    "Flow Duration",
    "Tot Fwd Pkts",
    "Tot Bwd Pkts",
    "TotLen Fwd Pkts",
    "TotLen Bwd Pkts",
    "Fwd Pkt Len Max",
    "Fwd Pkt Len Min",
    "Fwd Pkt Len Mean",
    "Fwd Pkt Len Std",
    "Bwd Pkt Len Max",
    "Bwd Pkt Len Min",
    "Bwd Pkt Len Mean",
    "Bwd Pkt Len Std",
    "Flow Byts/s",
    "Flow Pkts/s",
    "Flow IAT Mean",
    "Flow IAT Std",
    "Flow IAT Max",
    "Flow IAT Min",
    "Fwd IAT Tot",
    "Fwd IAT Mean",
    "Fwd IAT Std",
    "Fwd IAT Max",
    "Fwd IAT Min",
    "Bwd IAT Tot",
    "Bwd IAT Mean",
    "Bwd IAT Std",
    "Bwd IAT Max",
    "Bwd IAT Min",
    "Fwd PSH Flags",
    "Bwd PSH Flags",
    "Fwd URG Flags",
    "Bwd URG Flags",
    "Fwd Header Len",
    "Bwd Header Len",
    "Fwd Pkts/s",
    "Bwd Pkts/s",
    "Pkt Len Min",
    "Pkt Len Max",
    "Pkt Len Mean",
    "Pkt Len Std",
    "Pkt Len Var",
    "FIN Flag Cnt",
    "SYN Flag Cnt",
    "RST Flag Cnt",
    "PSH Flag Cnt",
    "ACK Flag Cnt",
    "URG Flag Cnt",
    "CWE Flag Count",
    "ECE Flag Cnt",
    "Down/Up Ratio",
    "Pkt Size Avg",
    "Fwd Seg Size Avg",
    "Bwd Seg Size Avg",
    "Fwd Byts/b Avg",
    "Fwd Pkts/b Avg",
    "Fwd Blk Rate Avg",
    "Bwd Byts/b Avg",
    "Bwd Pkts/b Avg",
    "Bwd Blk Rate Avg",
    "Subflow Fwd Pkts",
    "Subflow Fwd Byts",
    "Subflow Bwd Pkts",
    "Subflow Bwd Byts",
    "Init Fwd Win Byts",
    "Init Bwd Win Byts",
    "Fwd Act Data Pkts",
    "Fwd Seg Size Min",
    "Active Mean",
    "Active Std",
    "Active Max",
    "Active Min",
    "Idle Mean",
    "Idle Std",
    "Idle Max",
    "Idle Min",
    "Label",
];

#[derive(Debug, Default, PartialEq, Eq)]
pub struct HeaderCheck {
    pub missing: Vec<String>,
    pub extra: Vec<String>,
}

impl HeaderCheck {
    pub fn is_ok(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty()
    }
}

/// Compare a normalized header against the kind's registry.
pub fn check_header(kind: DatasetKind, header: &[String]) -> HeaderCheck {
    let keys: Vec<String> = header.iter().map(|h| column_key(h)).collect();
    let optional: Vec<String> = kind.optional_columns().iter().map(|c| column_key(c)).collect();
    let mut check = HeaderCheck::default();
    if kind == DatasetKind::Generic {
        if !keys.contains(&column_key(LABEL_COLUMN)) {
            check.missing.push(LABEL_COLUMN.to_string());
        }
        return check;
    }
    let registry: Vec<String> = kind.registry().iter().map(|c| column_key(c)).collect();
    for (name, key) in kind.registry().iter().zip(&registry) {
        if !keys.contains(key) && !optional.contains(key) {
            check.missing.push(name.to_string());
        }
    }
    for (name, key) in header.iter().zip(&keys) {
        if !registry.contains(key) && !optional.contains(key) {
            check.extra.push(name.clone());
        }
    }
    check
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_sizes() {
        assert_eq!(CIC_DDOS2019_COLUMNS.len(), 88);
        assert_eq!(CSE_CIC_IDS2018_COLUMNS.len(), 80);
    }

    #[test]
    fn registries_accept_themselves() {
        for kind in [DatasetKind::CicDdos2019, DatasetKind::CseCicIds2018] {
            let header = normalize_header(kind.registry().iter().copied());
            assert!(check_header(kind, &header).is_ok(), "{kind}");
        }
    }

    #[test]
    fn raw_ddos_header_with_spaces_and_repeat() {
        let raw: Vec<String> = CIC_DDOS2019_COLUMNS
            .iter()
            .map(|c| if *c == "Fwd Header Length.1" { " Fwd Header Length".to_string() } else { format!(" {c}") })
            .collect();
        let header = normalize_header(raw.iter().map(String::as_str));
        assert_eq!(header[62], "Fwd Header Length.1");
        assert!(check_header(DatasetKind::CicDdos2019, &header).is_ok());
    }

    #[test]
    fn missing_label_and_extras_reported() {
        let mut header = normalize_header(CSE_CIC_IDS2018_COLUMNS.iter().copied());
        header.pop();
        header.push("Mystery".into());
        let check = check_header(DatasetKind::CseCicIds2018, &header);
        assert_eq!(check.missing, vec!["Label".to_string()]);
        assert_eq!(check.extra, vec!["Mystery".to_string()]);

        let check = check_header(DatasetKind::Generic, &["a".to_string()]);
        assert_eq!(check.missing, vec!["Label".to_string()]);
    }

    #[test]
    fn optional_identifiers_accepted() {
        let mut header: Vec<String> = vec!["Flow ID".into(), "Src IP".into(), "Src Port".into(), "Dst IP".into()];
        header.extend(CSE_CIC_IDS2018_COLUMNS.iter().map(|s| s.to_string()));
        assert!(check_header(DatasetKind::CseCicIds2018, &header).is_ok());
    }
}
