#include "gpgrad/chain_io.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace gpgrad {

namespace {

constexpr const char* kMagic = "gpgrad-chain";
constexpr int kVersion = 1;

void write_matrix(std::ostream& os, const char* tag, const Eigen::MatrixXd& M) {
  os << tag << ' ' << M.rows() << ' ' << M.cols() << '\n';
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      os << (j ? " " : "") << M(i, j);
    os << '\n';
  }
}

void write_vector(std::ostream& os, const char* tag, const Eigen::VectorXd& v) {
  os << tag << ' ' << v.size() << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  os << '\n';
}

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path), path_(path) {
    if (!in_) throw std::runtime_error("cannot open chain file: " + path);
  }

  std::string word() {
    std::string w;
    if (!(in_ >> w)) fail("unexpected end of file");
    return w;
  }
  void expect(const std::string& tag) {
    const std::string w = word();
    if (w != tag) fail("expected '" + tag + "', found '" + w + "'");
  }
  double number() {
    double v;
    if (!(in_ >> v)) fail("malformed number");
    return v;
  }
  long integer() {
    long v;
    if (!(in_ >> v)) fail("malformed integer");
    return v;
  }
  double tagged(const std::string& tag) {
    expect(tag);
    return number();
  }
  Eigen::MatrixXd matrix(const std::string& tag) {
    expect(tag);
    const long r = integer(), c = integer();
    if (r < 0 || c < 0) fail("bad matrix size");
    Eigen::MatrixXd M(r, c);
    for (long i = 0; i < r; ++i)
      for (long j = 0; j < c; ++j) M(i, j) = number();
    return M;
  }
  Eigen::VectorXd vector(const std::string& tag) {
    expect(tag);
    const long n = integer();
    if (n < 0) fail("bad vector size");
    Eigen::VectorXd v(n);
    for (long i = 0; i < n; ++i) v[i] = number();
    return v;
  }
  [[noreturn]] void fail(const std::string& why) {
    throw std::runtime_error("chain file " + path_ + ": " + why);
  }

 private:
  std::ifstream in_;
  std::string path_;
};

void write_settings(std::ostream& os, const McmcSettings& s) {
  os << "nmcmc " << s.nmcmc << '\n'
     << "burn " << s.burn << '\n'
     << "thin " << s.thin << '\n'
     << "eps " << s.eps << '\n'
     << "prior_inner " << s.theta_prior_inner.shape << ' '
     << s.theta_prior_inner.rate << '\n'
     << "prior_outer " << s.theta_prior_outer.shape << ' '
     << s.theta_prior_outer.rate << '\n'
     << "prop " << s.prop_l << ' ' << s.prop_u << '\n'
     << "theta_init " << s.theta_init << '\n'
     << "vecchia " << (s.vecchia ? 1 : 0) << '\n'
     << "m " << s.m << '\n'
     << "latent_identity_prior_mean " << (s.latent_identity_prior_mean ? 1 : 0)
     << '\n'
     << "sample_warp " << (s.sample_warp ? 1 : 0) << '\n';
}

McmcSettings read_settings(Reader& r) {
  McmcSettings s;
  s.nmcmc = static_cast<int>(r.tagged("nmcmc"));
  s.burn = static_cast<int>(r.tagged("burn"));
  s.thin = static_cast<int>(r.tagged("thin"));
  s.eps = r.tagged("eps");
  r.expect("prior_inner");
  s.theta_prior_inner.shape = r.number();
  s.theta_prior_inner.rate = r.number();
  r.expect("prior_outer");
  s.theta_prior_outer.shape = r.number();
  s.theta_prior_outer.rate = r.number();
  r.expect("prop");
  s.prop_l = r.number();
  s.prop_u = r.number();
  s.theta_init = r.tagged("theta_init");
  s.vecchia = r.tagged("vecchia") != 0.0;
  s.m = static_cast<int>(r.tagged("m"));
  s.latent_identity_prior_mean =
      r.tagged("latent_identity_prior_mean") != 0.0;
  s.sample_warp = r.tagged("sample_warp") != 0.0;
  return s;
}

}  // namespace

void save_model(const std::string& path, const FittedModel& m) {
  const bool deep = m.is_deep();
  if (!deep && !m.gp.has_value())
    throw std::invalid_argument("save_model: empty model");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write chain file: " + path);
  os << std::setprecision(17);

  const TrainingSet& data = deep ? m.dgp->data : m.gp->data;
  const McmcSettings& s = deep ? m.dgp->settings : m.gp->settings;
  const bool ge = deep ? m.dgp->gradient_enhanced : m.gp->gradient_enhanced;
  const int retained = deep ? m.dgp->n_retained() : m.gp->n_retained();

  os << kMagic << " v" << kVersion << '\n';
  os << "model " << m.model << '\n';
  os << "n " << data.n() << '\n';
  os << "D " << data.D() << '\n';
  os << "retained " << retained << '\n';
  os << "gradient_enhanced " << (ge ? 1 : 0) << '\n';
  write_settings(os, s);
  os << "y_offset " << (deep ? m.dgp->y_offset : m.gp->y_offset) << '\n';
  os << "y_center " << m.y_center << '\n';
  os << "y_scale " << m.y_scale << '\n';
  write_vector(os, "x_lo", m.x_lo);
  write_vector(os, "x_hi", m.x_hi);
  write_matrix(os, "X", data.X);
  write_vector(os, "y", data.y);
  os << "has_grad " << (data.has_grad() ? 1 : 0) << '\n';
  if (data.has_grad()) write_matrix(os, "grad", *data.grad);

  if (!deep) {
    write_matrix(os, "theta", m.gp->theta);
  } else {
    os << "pinned_identity " << (m.dgp->pinned_identity ? 1 : 0) << '\n';
    write_matrix(os, "theta_in", m.dgp->theta_in);
    write_vector(os, "theta_out", m.dgp->theta_out);
    for (const auto& st : m.dgp->states) {
      write_matrix(os, "W", st.W);
      if (ge) {
        write_matrix(os, "W_all", *st.W_all);
        write_vector(os, "y_tilde", *st.y_tilde_all);
      }
    }
  }
  os << "end\n";
  if (!os) throw std::runtime_error("failed writing chain file: " + path);
}

FittedModel load_model(const std::string& path) {
  Reader r(path);
  r.expect(kMagic);
  r.expect("v1");
  FittedModel m;
  r.expect("model");
  m.model = r.word();
  const bool deep = m.model == "dgp" || m.model == "gedgp";
  if (!deep && m.model != "gp" && m.model != "gegp")
    r.fail("unknown model tag '" + m.model + "'");

  const int n = static_cast<int>(r.tagged("n"));
  const int D = static_cast<int>(r.tagged("D"));
  const int retained = static_cast<int>(r.tagged("retained"));
  const bool ge = r.tagged("gradient_enhanced") != 0.0;
  const McmcSettings s = read_settings(r);
  const double y_offset = r.tagged("y_offset");
  m.y_center = r.tagged("y_center");
  m.y_scale = r.tagged("y_scale");
  m.x_lo = r.vector("x_lo");
  m.x_hi = r.vector("x_hi");

  TrainingSet data;
  data.X = r.matrix("X");
  data.y = r.vector("y");
  if (r.tagged("has_grad") != 0.0) data.grad = r.matrix("grad");
  if (data.X.rows() != n || data.X.cols() != D) r.fail("training shape");

  if (!deep) {
    GpChain c;
    c.data = std::move(data);
    c.y_offset = y_offset;
    c.settings = s;
    c.gradient_enhanced = ge;
    c.theta = r.matrix("theta");
    if (c.theta.rows() != retained) r.fail("theta shape");
    m.gp = std::move(c);
  } else {
    DgpChain c;
    c.y_offset = y_offset;
    c.settings = s;
    c.gradient_enhanced = ge;
    c.pinned_identity = r.tagged("pinned_identity") != 0.0;
    c.theta_in = r.matrix("theta_in");
    c.theta_out = r.vector("theta_out");
    if (c.theta_in.rows() != retained || c.theta_out.size() != retained)
      r.fail("theta shape");
    c.states.reserve(retained);
    for (int t = 0; t < retained; ++t) {
      LatentState st;
      st.W = r.matrix("W");
      if (ge) {
        st.W_all = r.matrix("W_all");
        st.y_tilde_all = r.vector("y_tilde");
      }
      c.states.push_back(std::move(st));
    }
    c.data = std::move(data);
    m.dgp = std::move(c);
  }
  r.expect("end");
  return m;
}

}  // namespace gpgrad
