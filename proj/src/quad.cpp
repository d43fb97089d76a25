#include "supou/quad.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <memory>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "supou/errors.hpp"

namespace supou::quad {

namespace {

constexpr std::size_t kWorkspaceLimit = 4000;

struct GslInit {
  GslInit() { gsl_set_error_handler_off(); }
};
const GslInit gsl_init_once;

// One workspace per nesting depth so integrands may themselves integrate.
gsl_integration_workspace* workspace_at_depth(std::size_t depth) {
  thread_local std::vector<gsl_integration_workspace*> pool;
  while (pool.size() <= depth) pool.push_back(gsl_integration_workspace_alloc(kWorkspaceLimit));
  return pool[depth];
}

thread_local std::size_t current_depth = 0;

struct DepthGuard {
  DepthGuard() { ++current_depth; }
  ~DepthGuard() { --current_depth; }
};

double trampoline(double x, void* p) {
  return (*static_cast<const std::function<double(double)>*>(p))(x);
}

[[noreturn]] void quad_fail(const char* what, int status, double value, double abserr) {
  std::ostringstream os;
  os << "quadrature failed (" << what << "): " << gsl_strerror(status)
     << "; achieved estimate " << value << " with error bound " << abserr;
  fail(errc::numeric, os.str());
}

double run(const char* what, const std::function<double(double)>& f, double abs_tol,
           double rel_tol,
           const std::function<int(gsl_function*, gsl_integration_workspace*, double*, double*)>&
               invoke) {
  gsl_function gf;
  gf.function = &trampoline;
  gf.params = const_cast<std::function<double(double)>*>(&f);
  gsl_integration_workspace* w = workspace_at_depth(current_depth);
  DepthGuard guard;
  double value = 0.0;
  double abserr = 0.0;
  const int status = invoke(&gf, w, &value, &abserr);
  if (status == GSL_SUCCESS) return value;
  // Roundoff-limited results are accepted when the reported bound is still
  // within a small multiple of the request.
  const double request = abs_tol + rel_tol * std::abs(value);
  if (status == GSL_EROUND && abserr <= 16.0 * request) return value;
  quad_fail(what, status, value, abserr);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 double rel_tol) {
  return run("finite interval", f, abs_tol, rel_tol,
             [&](gsl_function* gf, gsl_integration_workspace* w, double* v, double* e) {
               return gsl_integration_qag(gf, a, b, abs_tol, rel_tol, kWorkspaceLimit,
                                          GSL_INTEG_GAUSS61, w, v, e);
             });
}

double integrate_upper(const std::function<double(double)>& f, double a, double abs_tol,
                       double rel_tol) {
  return run("semi-infinite upper interval", f, abs_tol, rel_tol,
             [&](gsl_function* gf, gsl_integration_workspace* w, double* v, double* e) {
               return gsl_integration_qagiu(gf, a, abs_tol, rel_tol, kWorkspaceLimit, w, v, e);
             });
}

double integrate_lower(const std::function<double(double)>& f, double b, double abs_tol,
                       double rel_tol) {
  return run("lower interval", f, abs_tol, rel_tol,
             [&](gsl_function* gf, gsl_integration_workspace* w, double* v, double* e) {
               return gsl_integration_qagil(gf, b, abs_tol, rel_tol, kWorkspaceLimit, w, v, e);
             });
}

void gauss_legendre(std::size_t n, double a, double b, double* x, double* w) {
  require(n >= 1, errc::contract, "gauss_legendre order must be at least 1");
  thread_local std::unordered_map<std::size_t, gsl_integration_glfixed_table*> tables;
  auto it = tables.find(n);
  if (it == tables.end()) {
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(n);
    require(t != nullptr, errc::resource, "failed to allocate Gauss-Legendre table");
    it = tables.emplace(n, t).first;
  }
  for (std::size_t i = 0; i < n; ++i) {
    gsl_integration_glfixed_point(a, b, i, &x[i], &w[i], it->second);
  }
}

}  // namespace supou::quad
