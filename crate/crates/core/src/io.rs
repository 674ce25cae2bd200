//! CSV output: a `#` metadata block, a header row, then full-precision values.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::config::Scenario;
use crate::error::Result;
use crate::fibre::FibreSpec;
use crate::gn::NliResult;
use crate::grid::ChannelGrid;
use crate::link::{LinkReport, SegmentProfile};
use crate::raman::PowerEvolution;
use crate::units::{freq_to_wavelength, linear_to_db, watt_to_dbm, wavelength_to_freq, PER_W_KM, PS_NM_KM};

/// Formats with 17 significant digits; non-finite values become empty fields.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

/// Key/value lines written ahead of the header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    pub entries: Vec<(String, String)>,
}

impl Metadata {
    /// Scenario hash, code version, command and the parameters that shape results.
    /// Worker counts are deliberately absent.
    pub fn for_scenario(scenario: &Scenario, command: &str) -> Self {
        let mut m = Metadata::default();
        m.push("command", command);
        m.push("version", env!("CARGO_PKG_VERSION"));
        m.push("scenario_sha256", scenario.hash());
        m.push("seed", scenario.seed);
        m.push("n_riemann", scenario.solver.n_riemann);
        m.push("mean_steps_per_km", scenario.solver.mean_steps_per_km);
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.push(key, value);
        self
    }
}

/// Writes one CSV file.
pub fn write_csv(path: &Path, meta: &Metadata, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for (k, v) in &meta.entries {
        writeln!(out, "# {k}: {v}")?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    out.flush()?;
    Ok(())
}

pub const FIBRE_HEADER: [&str; 5] = ["lambda_nm", "alpha_dB_km", "D_ps_nm_km", "gamma_per_W_km", "aeff_um2"];

/// Fibre profiles on `lo..=hi` in `step` nm; empty when `lo > hi`.
pub fn fibre_rows(fibre: &FibreSpec, lo_nm: f64, hi_nm: f64, step_nm: f64) -> Result<Vec<Vec<String>>> {
    let mut rows = Vec::new();
    if !(step_nm > 0.0) || lo_nm > hi_nm {
        return Ok(rows);
    }
    let count = ((hi_nm - lo_nm) / step_nm + 1e-9).floor() as usize + 1;
    for k in 0..count {
        let nm = lo_nm + k as f64 * step_nm;
        let l = nm * 1e-9;
        let f = wavelength_to_freq(l);
        let d = fibre.dispersion_table.d_at(l).unwrap_or_else(|| fibre.dispersion.d_at(l));
        rows.push(vec![
            num(nm),
            num(fibre.attenuation.db_km(l)?),
            num(d / PS_NM_KM),
            num(fibre.gamma_at_freq(f)? / PER_W_KM),
            num(fibre.aeff_at_freq(f)? * 1e12),
        ]);
    }
    Ok(rows)
}

pub const NLI_HEADER: [&str; 9] =
    ["index", "freq_Hz", "lambda_nm", "band", "guard", "launch_dBm", "eta_per_W2", "eta_dB", "nli_power_W"];

/// One row per channel; guards and unlit channels carry empty η.
pub fn nli_rows(grid: &ChannelGrid, launch: &[f64], nli: &NliResult) -> Vec<Vec<String>> {
    (0..grid.len())
        .map(|i| {
            let ok = nli.defined[i];
            vec![
                i.to_string(),
                num(grid.freq(i)),
                num(freq_to_wavelength(grid.freq(i)) * 1e9),
                grid.band_of(i).map(|b| b.to_string()).unwrap_or_default(),
                (grid.is_guard(i) as u8).to_string(),
                num(watt_to_dbm(launch[i])),
                if ok { num(nli.eta[i]) } else { String::new() },
                if ok { num(linear_to_db(nli.eta[i])) } else { String::new() },
                if ok { num(nli.nli_power[i]) } else { String::new() },
            ]
        })
        .collect()
}

/// ρ(z̃_m, f_i) for every span: rows are steps, one column per channel.
pub fn rho_table(evos: &[PowerEvolution]) -> (Vec<String>, Vec<Vec<String>>) {
    let n = evos.first().map_or(0, |e| e.channel_count());
    let mut header = vec!["span".to_string(), "z_m".to_string()];
    header.extend((0..n).map(|i| format!("rho_{i}")));
    let mut rows = Vec::new();
    for (s, evo) in evos.iter().enumerate() {
        for m in 0..evo.step_count() {
            let mut r = vec![s.to_string(), num(evo.grid.eval_points[m])];
            r.extend((0..n).map(|i| num(evo.rho(m, i))));
            rows.push(r);
        }
        let mut r = vec![s.to_string(), num(evo.grid.length())];
        r.extend((0..n).map(|i| num(evo.rho_end(i))));
        rows.push(r);
    }
    (header, rows)
}

pub const VALIDATE_HEADER: [&str; 7] =
    ["index", "freq_Hz", "eta_gn_per_W2", "eta_ssfm_per_W2", "eta_gn_dB", "eta_ssfm_dB", "delta_dB"];

pub fn validate_rows(grid: &ChannelGrid, channels: &[usize], gn: &[f64], ssfm: &[f64]) -> Vec<Vec<String>> {
    channels
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let (a, b) = (linear_to_db(gn[k]), linear_to_db(ssfm[k]));
            vec![i.to_string(), num(grid.freq(i)), num(gn[k]), num(ssfm[k]), num(a), num(b), num(a - b)]
        })
        .collect()
}

pub const PROFILE_HEADER: [&str; 3] = ["band", "edge_freq_Hz", "power_dBm"];

pub fn profile_rows(profile: &SegmentProfile) -> Vec<Vec<String>> {
    profile
        .bands
        .iter()
        .flat_map(|b| {
            b.edge_freqs.iter().zip(&b.edge_dbm).map(move |(f, p)| vec![b.band.to_string(), num(*f), num(*p)])
        })
        .collect()
}

pub const REPORT_HEADER: [&str; 9] =
    ["index", "freq_Hz", "band", "guard", "launch_dBm", "eta_dB", "p_ase_W", "snr_dB", "capacity_bps"];

pub fn report_rows(report: &LinkReport) -> Vec<Vec<String>> {
    report
        .channels
        .iter()
        .map(|c| {
            vec![
                c.index.to_string(),
                num(c.freq_hz),
                c.band.map(|b| b.to_string()).unwrap_or_default(),
                (c.guard as u8).to_string(),
                num(c.launch_dbm),
                num(c.eta_db),
                num(c.p_ase_w),
                num(c.snr_db),
                num(c.capacity_bps),
            ]
        })
        .collect()
}

pub const BANDS_HEADER: [&str; 4] = ["band", "channels", "total_power_dBm", "capacity_Tbps"];

/// Per-band totals followed by an `all` row.
pub fn band_rows(report: &LinkReport) -> Vec<Vec<String>> {
    let mut rows: Vec<Vec<String>> = report
        .bands
        .iter()
        .map(|b| vec![b.band.to_string(), b.channels.to_string(), num(b.total_power_dbm), num(b.capacity_tbps)])
        .collect();
    let lit: usize = report.bands.iter().map(|b| b.channels).sum();
    rows.push(vec!["all".into(), lit.to_string(), num(report.total_power_dbm), num(report.capacity_tbps)]);
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        let s = num(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        assert_eq!(num(f64::NEG_INFINITY), "");
        for x in [std::f64::consts::PI, 1.0 / 3.0, 6.02214076e23, -2.5e-300] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn metadata_block_precedes_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        let meta = Metadata::default().with("a", 1).with("b", "two");
        write_csv(&p, &meta, &["c1", "c2"], &[vec!["1".into(), "2".into()]]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text, "# a: 1\n# b: two\nc1,c2\n1,2\n");
    }

    #[test]
    fn empty_range_keeps_the_header_only() {
        let f = FibreSpec::standard(80e3);
        assert!(fibre_rows(&f, 1500.0, 1400.0, 1.0).unwrap().is_empty());
        assert_eq!(fibre_rows(&f, 1400.0, 1402.0, 1.0).unwrap().len(), 3);
    }
}
