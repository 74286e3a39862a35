//! Sizing a storage-loop detector for single-photon heralding.
//!
//! Builds loops of growing bin count from the visible-band component
//! values, heralds on a single click, and prints how fidelity trades
//! against detection probability — more bins resolve photon number
//! better, but every extra bin adds loss.
//!
//! Run with: `cargo run --example herald_tradeoff`

use pnrd::{
    condition_on_clicks, loop_coupling_for_error, ArchitectureKind, ComponentParams64, PdcSource,
};

fn main() -> pnrd::Result<()> {
    let params = ComponentParams64 {
        coupler_loss_db: 0.4,
        fiber_loss_db: 0.2,
        switch_loss_db: 2.0,
        detector_efficiency: 0.60,
        dark_count: 5e-6,
    };
    let source = PdcSource::for_target(0.3, 1)?;

    println!("n_bins  coupling  fidelity  detection_probability");
    for n_bins in 1..=6 {
        // Smallest coupling whose never-exits probability stays under 1%.
        let coupling_ratio = loop_coupling_for_error(n_bins, 0.01)?;
        let spec = ArchitectureKind::LoopTdm {
            n_bins,
            coupling_ratio,
            params,
        }
        .compile()?;
        let matrix = spec.conditional_matrix(spec.default_n_max(&source));
        match condition_on_clicks(&matrix, 1, &source)?.prepared() {
            Some(report) => println!(
                "{n_bins:>6}  {coupling_ratio:>8.4}  {:>8.6}  {:>21.6}",
                report.fidelity, report.detection_probability
            ),
            None => println!("{n_bins:>6}  {coupling_ratio:>8.4}  impossible"),
        }
    }
    Ok(())
}
