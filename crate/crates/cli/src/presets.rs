//! Figure presets: named parameter sets, one subcommand each.

use crate::config::{GridSpec, Quantity, Settings};
use crate::error::{CliError, Result};
use crate::sweep::SweepConfig;

/// Span of the λ₁t axis and of the waiting time λ₁(τ − t).
pub const AXIS_SPAN: f64 = 10.0;
/// λ₁t at which stage B starts in the final-pair figures.
pub const STAGE_B_START: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
        }
    }
}

struct Panel {
    omega_m: GridSpec,
    g: GridSpec,
}

fn panel(omega_m: &[f64], g: &[f64]) -> Panel {
    Panel {
        omega_m: GridSpec::Values(omega_m.to_vec()),
        g: GridSpec::Values(g.to_vec()),
    }
}

/// Builds the sweeps of a figure. Settings override the preset axes; a λ₁t override
/// moves the τ window of the final-pair figures with it.
pub fn figure_sweeps(figure: Figure, settings: &Settings) -> Result<Vec<SweepConfig>> {
    if settings.quantity.is_some() {
        return Err(CliError::usage(format!(
            "{} fixes its quantities; drop --quantity",
            figure.name()
        )));
    }
    let (quantities, panels, stage_b): (&[Quantity], Vec<Panel>, bool) = match figure {
        Figure::Fig2 => (
            &[Quantity::E14, Quantity::P14_1],
            vec![panel(&[0.5, 1.0, 1.5], &[2.0])],
            false,
        ),
        Figure::Fig3 => (
            &[Quantity::E14, Quantity::P14_1],
            vec![panel(&[0.5], &[2.0, 2.5, 3.0])],
            false,
        ),
        Figure::Fig4 => (
            &[Quantity::P14_2],
            vec![
                panel(&[0.5, 1.0, 1.5], &[2.0]),
                panel(&[0.5], &[2.0, 2.5, 3.0]),
            ],
            false,
        ),
        Figure::Fig5 => (
            &[Quantity::E18, Quantity::P18],
            vec![panel(&[0.5, 1.0, 1.5], &[2.0])],
            true,
        ),
        Figure::Fig6 => (
            &[Quantity::E18, Quantity::P18],
            vec![panel(&[0.5], &[0.5, 0.7, 0.9])],
            true,
        ),
    };
    if !stage_b && settings.lambda1_tau.is_some() {
        return Err(CliError::usage(format!(
            "{} has no lambda1_tau axis",
            figure.name()
        )));
    }
    if !stage_b && settings.case_id.is_some() {
        return Err(CliError::usage(format!("{} has no cases", figure.name())));
    }

    let points = settings.points_or_default();
    let (lambda1_t, lambda1_tau) = if stage_b {
        let t = settings
            .lambda1_t
            .clone()
            .unwrap_or(GridSpec::single(STAGE_B_START));
        let start = t.scalar().ok_or_else(|| {
            CliError::usage(format!("{} needs a single lambda1_t value", figure.name()))
        })?;
        let tau = settings
            .lambda1_tau
            .clone()
            .unwrap_or(GridSpec::range(start, start + AXIS_SPAN));
        (t, Some(tau))
    } else {
        (
            settings
                .lambda1_t
                .clone()
                .unwrap_or(GridSpec::range(0.0, AXIS_SPAN)),
            None,
        )
    };

    let mut out = Vec::new();
    for p in &panels {
        for &quantity in quantities {
            let config = SweepConfig {
                quantity,
                case_id: settings.case_id,
                lambda1_t: lambda1_t.clone(),
                lambda1_tau: lambda1_tau.clone(),
                omega_m: settings.omega_m.clone().unwrap_or(p.omega_m.clone()),
                g: settings.g.clone().unwrap_or(p.g.clone()),
                points,
            };
            config.validate()?;
            out.push(config);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shapes() {
        let s = Settings::default();
        let rows = |f| -> usize {
            figure_sweeps(f, &s)
                .unwrap()
                .iter()
                .map(|c| c.grid_points().len())
                .sum()
        };
        assert_eq!(rows(Figure::Fig2), 2 * 3 * 400);
        assert_eq!(rows(Figure::Fig3), 2 * 3 * 400);
        assert_eq!(rows(Figure::Fig4), 2 * 3 * 400);
        assert_eq!(rows(Figure::Fig5), 2 * 4 * 3 * 400);
        assert_eq!(rows(Figure::Fig6), 2 * 4 * 3 * 400);
    }

    #[test]
    fn stage_b_window_follows_t() {
        let s = Settings {
            lambda1_t: Some(GridSpec::single(2.0)),
            points: Some(3),
            ..Settings::default()
        };
        let c = &figure_sweeps(Figure::Fig5, &s).unwrap()[0];
        assert_eq!(
            c.lambda1_tau.as_ref().unwrap().values(c.points),
            vec![2.0, 7.0, 12.0]
        );
    }

    #[test]
    fn misplaced_settings_are_rejected() {
        let tau = Settings {
            lambda1_tau: Some(GridSpec::single(2.0)),
            ..Settings::default()
        };
        assert!(figure_sweeps(Figure::Fig2, &tau).is_err());
        let case = Settings {
            case_id: Some(1),
            ..Settings::default()
        };
        assert!(figure_sweeps(Figure::Fig3, &case).is_err());
        assert!(figure_sweeps(Figure::Fig6, &case).is_ok());
        let t_range = Settings {
            lambda1_t: Some(GridSpec::range(0.0, 1.0)),
            ..Settings::default()
        };
        assert!(figure_sweeps(Figure::Fig5, &t_range).is_err());
    }
}
