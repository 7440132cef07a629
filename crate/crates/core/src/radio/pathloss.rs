//! Large-scale pathloss models.

use serde::{Deserialize, Serialize};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum PathlossModel {
    #[default]
    /// 3GPP TR 38.901 UMi Street Canyon, LOS/NLOS from the building test.
    UmiStreetCanyon,
    /// `ref_loss_db + 10 * exponent * log10(d3d)`, optional extra NLOS loss.
    LogDistance {
        ref_loss_db: f64,
        exponent: f64,
        #[serde(default)]
        nlos_extra_db: f64,
    },
}


#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub d2d: f64,
    pub d3d: f64,
    pub h_bs: f64,
    pub h_ut: f64,
    pub los: bool,
}

impl PathlossModel {
    /// Pathloss in dB at carrier frequency `fc_ghz`.
    pub fn loss_db(&self, g: &Geometry, fc_ghz: f64) -> f64 {
        let d3d = g.d3d.max(1.0);
        match *self {
            PathlossModel::UmiStreetCanyon => {
                let los = umi_los(g, d3d, fc_ghz);
                if g.los {
                    los
                } else {
                    let nlos = 35.3 * d3d.log10() + 22.4 + 21.3 * fc_ghz.log10() - 0.3 * (g.h_ut - 1.5);
                    los.max(nlos)
                }
            }
            PathlossModel::LogDistance {
                ref_loss_db,
                exponent,
                nlos_extra_db,
            } => {
                let pl = ref_loss_db + 10.0 * exponent * d3d.log10();
                if g.los {
                    pl
                } else {
                    pl + nlos_extra_db
                }
            }
        }
    }
}

fn umi_los(g: &Geometry, d3d: f64, fc_ghz: f64) -> f64 {
    let h_bs_eff = g.h_bs - 1.0;
    let h_ut_eff = g.h_ut - 1.0;
    let d_bp = 4.0 * h_bs_eff * h_ut_eff * fc_ghz * 1e9 / SPEED_OF_LIGHT;
    if g.d2d <= d_bp {
        32.4 + 21.0 * d3d.log10() + 20.0 * fc_ghz.log10()
    } else {
        32.4 + 40.0 * d3d.log10() + 20.0 * fc_ghz.log10()
            - 9.5 * (d_bp * d_bp + (g.h_bs - g.h_ut).powi(2)).log10()
    }
}
