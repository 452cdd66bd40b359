// Generates a small synthetic instance and runs a week of unbundled bidding.

#include <cstdio>

#include "flexbid/simulate.hpp"
#include "flexbid/synthetic.hpp"

int main() {
  using namespace flexbid;
  synthetic::SyntheticSpec spec;
  spec.buildings = 20;
  spec.days = 7;
  spec.history_days = 14;
  auto [inst, cfg] = synthetic::generate_synthetic(spec);
  scenarios::fill_missing_forecasts(inst.prices);

  cfg.scenarios = 12;
  simulate::CampaignReport rep = simulate::run_campaign(cfg, inst);
  for (const auto& d : rep.days)
    std::printf("%s  inf %8.2f  cleared %8.2f  opt %8.2f  eta %6.3f  bid %d/%d\n", d.day.iso().c_str(), d.tc_inf,
                d.tc_cleared, d.tc_opt, d.eta, d.accepted_bid, d.num_bids);
  std::printf("eta %.4f, savings %.2f EUR (%.2f EUR per heat pump)\n", rep.eta_weighted, rep.savings_eur,
              rep.savings_per_hp_eur);
}
