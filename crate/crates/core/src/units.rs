//! Unit constants and conversions. All internal physics is SI (V, A, W, °C,
//! mol/s); network quantities are per-unit on the configured MVA base.

/// Molar volume of an ideal gas at 0 °C / 1 atm [Nm³/mol].
pub const NM3_PER_MOL: f64 = 0.022414;

/// Hydrogen mass per normal cubic meter [kg/Nm³]. Kept as an explicit
/// configuration constant because sale contracts quote it; the shipped
/// default corresponds to 1000 Nm³/h ≈ 89.3 kg/h.
pub const DEFAULT_H2_KG_PER_NM3: f64 = 0.0893;

pub const SECONDS_PER_HOUR: f64 = 3600.0;
pub const HOURS_PER_YEAR_DAYS: f64 = 365.0;

/// mol/s of hydrogen to Nm³/h.
pub fn mol_per_s_to_nm3_per_h(mol_s: f64) -> f64 {
    mol_s * NM3_PER_MOL * SECONDS_PER_HOUR
}

/// mol/s of hydrogen to kg/h at the configured gas density.
pub fn mol_per_s_to_kg_per_h(mol_s: f64, kg_per_nm3: f64) -> f64 {
    mol_per_s_to_nm3_per_h(mol_s) * kg_per_nm3
}

/// Watts to per-unit on an MVA base.
pub fn w_to_pu(w: f64, base_mva: f64) -> f64 {
    w / (base_mva * 1e6)
}

pub fn mw_to_pu(mw: f64, base_mva: f64) -> f64 {
    mw / base_mva
}

pub fn pu_to_mw(pu: f64, base_mva: f64) -> f64 {
    pu * base_mva
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rated_flow_mass_conversion() {
        // 1000 Nm³/h at the default density is about 89.3 kg/h.
        let mol_s = 1000.0 / NM3_PER_MOL / SECONDS_PER_HOUR;
        let kg_h = mol_per_s_to_kg_per_h(mol_s, DEFAULT_H2_KG_PER_NM3);
        assert!((kg_h - 89.3).abs() < 1e-9);
    }
}
