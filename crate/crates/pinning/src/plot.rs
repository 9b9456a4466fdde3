//! gnuplot scripts for the emitted CSV files.

use crate::commands::Command;
use crate::config::RunConfig;

const PREAMBLE: &str = "set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\nset terminal pngcairo size 900,650\n";

pub fn script(cmd: Command, cfg: &RunConfig) -> String {
    let body = match cmd {
        Command::Map => "# map.json holds a single point; nothing to plot.\n".to_owned(),
        Command::Sweep => "set output 'sweep_gamma.png'\n\
             set xlabel 'Delta_p / Gamma'\nset ylabel 'Omega / Gamma'\n\
             set view map\nset title '|gamma|'\n\
             splot 'sweep.csv' using 1:2:4 with image notitle\n\
             set output 'sweep_depth.png'\nset title 'V_1 / E_R'\n\
             splot 'sweep.csv' using 1:2:5 with image notitle\n"
            .to_owned(),
        Command::Phase => "set output 'phase.png'\n\
             set xlabel 'Delta_p / Gamma'\nset ylabel 'Omega / Gamma'\n\
             plot 'phase_grid.csv' using 1:2:(strcol(6) eq 'MOTT_BH' ? 1 : strcol(6) eq 'MOTT_SG' ? 2 : strcol(6) eq 'SF' ? 3 : 0) \
             with points pt 5 ps 0.6 palette notitle\n"
            .to_owned(),
        Command::Crossing => format!(
            "set output 'crossing.png'\n\
             set xlabel 'Omega / Gamma'\nset logscale y\n\
             plot 'crossing_curves.csv' using 1:2 with lines, '' using 1:3 with lines, '' using 1:4 with lines, \
             {} with lines dashtype 2 title '(U/J)_c'\n",
            pinning_core::many_body::BH_CRITICAL_U_OVER_J
        ),
        Command::Nlse => "set output 'nlse.png'\n\
             set multiplot layout 2,1\n\
             set xlabel 'tau'\nplot 'nlse_trajectory.csv' using 1:4 with lines, '' using 1:2 with lines\n\
             set xlabel 'time (s)'\nplot 'nlse_release.csv' using 1:3 with lines\n\
             unset multiplot\n"
            .to_owned(),
        Command::Ed => {
            let mut s = String::from("set output 'ed.png'\nset xlabel 'U/J'\nset ylabel 'L * gap / J'\nplot ");
            let mut sizes = cfg.ed.sizes.clone();
            sizes.sort_unstable();
            sizes.dedup();
            let parts: Vec<String> = sizes
                .iter()
                .map(|l| format!("'ed_results.csv' using ($1 == {l} ? $4 : 1/0):($1 * $6) with linespoints title 'L = {l}'"))
                .collect();
            s.push_str(&parts.join(", "));
            s.push('\n');
            s
        }
    };
    format!("{PREAMBLE}{body}")
}
