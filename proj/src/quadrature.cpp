#include "kolmo/quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <memory>
#include <string>

#include "kolmo/error.hpp"

namespace kolmo {

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw InvalidArgument("gauss_legendre: need at least one node");
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> t(
      gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n)), gsl_integration_glfixed_table_free);
  if (!t) throw Error("gauss_legendre: allocation failed");
  QuadratureRule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    gsl_integration_glfixed_point(a, b, static_cast<std::size_t>(i), &r.nodes[i], &r.weights[i], t.get());
  }
  return r;
}

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 double rel_tol) {
  static thread_local bool handler_off = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)handler_off;
  constexpr std::size_t kLimit = 200;
  std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)> ws(
      gsl_integration_workspace_alloc(kLimit), gsl_integration_workspace_free);
  gsl_function gf;
  gf.function = [](double x, void* p) { return (*static_cast<const std::function<double(double)>*>(p))(x); };
  gf.params = const_cast<std::function<double(double)>*>(&f);
  double result = 0.0, err = 0.0;
  const int status = gsl_integration_qag(&gf, a, b, abs_tol, rel_tol, kLimit, GSL_INTEG_GAUSS61, ws.get(),
                                         &result, &err);
  if (status != GSL_SUCCESS && status != GSL_EROUND) {
    throw Error(std::string("integrate: ") + gsl_strerror(status));
  }
  return result;
}

}  // namespace kolmo
