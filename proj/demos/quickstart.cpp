// Curvature and positivity verdicts for a DSL metric and a few bundles built from it.
#include <iostream>

#include "rcpos/certify.hpp"
#include "rcpos/parser.hpp"

int main() {
  using namespace rcpos;
  const MetricField m = parse_metric(
      "metric twisted dim=2 rank=2 domain=polydisc:0.8\n"
      "h[1][1] = (1 + absq(z1) + absq(z2))^-1\n"
      "h[2][2] = (1 + absq(z1) + absq(z2))^-1\n"
      "h[1][2] = 0.1*z1*conj(z2)*(1 + absq(z1) + absq(z2))^-1\n");
  const CVector z = (CVector(2) << Complex(0.3, 0.1), Complex(-0.2, 0.4)).finished();

  for (const char* text : {"base", "dual(base)", "ext(base,2)", "sym(base,2)", "tensor(base,2)"}) {
    const CurvaturePoint cp = derived_curvature(*parse_bundle(text), m, z);
    CertifierOptions opt;
    opt.seed = 1;
    const PositivityCertificate rc = certify_rc_positive(cp, opt);
    const PositivityCertificate gr = certify_griffiths(cp, opt);
    std::cout << text << " (rank " << cp.rank() << "): rc+ " << to_string(rc.verdict) << " margin " << rc.margin
              << ", griffiths+ " << to_string(gr.verdict) << " margin " << gr.margin << "\n";
  }
}
