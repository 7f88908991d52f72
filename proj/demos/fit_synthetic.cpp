// Draw a GNB sample, fit NB and GNB under each metric, print the table.
#include <cstdio>

#include "gnbfit/gnbfit.hpp"

int main() {
  const gnbfit::GGParams truth(2.0, 1.5, 1.0);
  const auto draws = gnbfit::sample_gnb(truth, 20000, 7);
  const auto sample = gnbfit::Sample::from_counts(draws, "gnb r=2 gamma=1.5 mu=1");

  std::printf("%-4s %-5s %10s %10s %10s %12s\n", "fam", "metric", "r", "gamma", "mu", "objective");
  for (auto family : {gnbfit::ModelFamily::nb, gnbfit::ModelFamily::gnb}) {
    for (auto metric : gnbfit::kAllMetrics) {
      gnbfit::FitRequest req;
      req.family = family;
      req.metric = metric;
      const auto fit = gnbfit::fit(sample, req);
      std::printf("%-4s %-5s %10.5f %10.5f %10.5f %12.6g\n", gnbfit::to_string(family),
                  gnbfit::to_string(metric), fit.params.r, fit.params.gamma_exp,
                  fit.params.mu, fit.achieved_objective);
    }
  }
}
