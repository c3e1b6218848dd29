#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <solitonforge/curve_flow.hpp>

using namespace soliton;

TEST_CASE("support geometry of circle and ellipse") {
  SupportCurve circle = make_circle(2.0, 128);
  SupportGeometry gc = support_geometry(circle);
  CHECK(std::abs(gc.area - M_PI * 4.0) < 1e-10);
  for (double k : gc.curvature) CHECK(std::abs(k - 0.5) < 1e-10);

  SupportCurve ell = make_ellipse(2.0, 1.0, 256);
  SupportGeometry ge = support_geometry(ell);
  CHECK(std::abs(ge.area - 2.0 * M_PI) < 1e-6);
}

TEST_CASE("spectral periodic derivatives are exact on low modes") {
  const int N = 32;
  std::vector<double> f(N), df_expect(N), d2f_expect(N);
  for (int i = 0; i < N; ++i) {
    double th = 2.0 * M_PI * i / N;
    f[i] = std::sin(3 * th) + 0.5 * std::cos(th);
    df_expect[i] = 3 * std::cos(3 * th) - 0.5 * std::sin(th);
    d2f_expect[i] = -9 * std::sin(3 * th) - 0.5 * std::cos(th);
  }
  auto df = periodic_derivative(f);
  auto d2f = periodic_second_derivative(f);
  for (int i = 0; i < N; ++i) {
    CHECK(std::abs(df[i] - df_expect[i]) < 1e-10);
    CHECK(std::abs(d2f[i] - d2f_expect[i]) < 1e-9);
  }
}

TEST_CASE("shrinking circle follows the exact radius law") {
  FlowTrajectory traj = csf_run(make_circle(1.0, 64), 0.375, 1e-4, 10);
  REQUIRE(!traj.aborted);
  const SupportCurve& last = traj.curves.back();
  CHECK(std::abs(traj.times.back() - 0.375) < 1e-12);
  for (double w : last.w) CHECK(std::abs(w - 0.5) < 1e-4);
  CHECK(std::abs(traj.extinction_estimate - 0.5) < 1e-10);
}

TEST_CASE("non-convex initial curve is rejected") {
  SupportCurve bad = make_circle(1.0, 64);
  for (int i = 0; i < 64; ++i)
    bad.w[i] += 0.5 * std::cos(8 * bad.theta(i));  // w'' + w dips negative
  CHECK(!is_convex(bad));
  CHECK_THROWS(csf_run(bad, 0.1, 1e-4, 5));
}

TEST_CASE("ellipse area decreases at rate 2 pi") {
  FlowTrajectory traj = csf_run(make_ellipse(2.0, 1.0, 256), 0.6, 1e-3, 30);
  REQUIRE(!traj.aborted);
  AreaLawReport rep = area_law_check(traj);
  CHECK(rep.pass);
  CHECK(rep.deviation <= 0.005);

  // negative control: perturbed areas must trip the check
  FlowTrajectory fake = traj;
  for (std::size_t i = 0; i < fake.areas.size(); ++i)
    fake.areas[i] += 0.05 * static_cast<double>(i);
  CHECK(!area_law_check(fake).pass);
}

TEST_CASE("circle trajectory slope is exactly -2 pi") {
  FlowTrajectory traj = csf_run(make_circle(1.0, 64), 0.4, 1e-4, 20);
  AreaLawReport rep = area_law_check(traj);
  CHECK(std::abs(rep.slope + 2.0 * M_PI) < 1e-4);
}

TEST_CASE("normalized roundness of the circle stays zero") {
  FlowTrajectory traj = csf_run(make_circle(1.0, 64), 0.4, 1e-4, 20);
  RoundnessReport rep = normalize_and_roundness(traj);
  REQUIRE(!rep.delta.empty());
  for (double d : rep.delta) CHECK(d < 1e-6);
}

TEST_CASE("normalized roundness of the ellipse decreases") {
  FlowTrajectory traj = csf_run(make_ellipse(2.0, 1.0, 256), 0.7, 1e-3, 30);
  RoundnessReport rep = normalize_and_roundness(traj);
  REQUIRE(rep.delta.size() >= 5);
  for (std::size_t i = 1; i < rep.delta.size(); ++i)
    CHECK(rep.delta[i] <= rep.delta[i - 1] + 1e-9);
  // log-linear decay exponent in (T - t) is positive
  double T = rep.extinction_time;
  double x0 = std::log(T - rep.times.front());
  double x1 = std::log(T - rep.times.back());
  double y0 = std::log(rep.delta.front());
  double y1 = std::log(rep.delta.back());
  CHECK((y0 - y1) / (x0 - x1) > 0);
}

TEST_CASE("curvature decay diagnostics") {
  FlowTrajectory circ = csf_run(make_circle(1.0, 64), 0.3, 1e-4, 10);
  DecayReport rc = gage_hamilton_decay(circ);
  CHECK(!rc.applicable);
  CHECK(rc.pass);

  FlowTrajectory ell = csf_run(make_ellipse(2.0, 1.0, 256), 0.6, 1e-3, 30);
  DecayReport re = gage_hamilton_decay(ell);
  CHECK(re.applicable);
  CHECK(re.pass);
  CHECK(re.rate < 0);

  SupportCurve wob = make_circle(1.0, 128);
  for (int i = 0; i < 128; ++i) wob.w[i] += 0.05 * std::cos(3 * wob.theta(i));
  FlowTrajectory pw = csf_run(wob, 0.3, 1e-4, 20);
  DecayReport rp = gage_hamilton_decay(pw);
  CHECK(rp.applicable);
  CHECK(rp.rate < 0);
  CHECK(std::abs(rp.rate) > std::abs(re.rate));
}

TEST_CASE("trajectory export writes the frozen CSV columns") {
  FlowTrajectory traj = csf_run(make_circle(1.0, 32), 0.2, 1e-3, 5);
  auto dir = std::filesystem::temp_directory_path() / "sf_csf";
  std::filesystem::create_directories(dir);
  traj.export_csv((dir / "flow").string());
  std::ifstream is(dir / "flow_trajectory.csv");
  REQUIRE(is.good());
  std::string header;
  std::getline(is, header);
  CHECK(header == "t,area,delta_t,kprime_energy");
  int rows = 0;
  for (std::string line; std::getline(is, line);)
    if (!line.empty()) ++rows;
  CHECK(rows == static_cast<int>(traj.times.size()));
  CHECK(std::filesystem::exists(dir / "flow_curve_0000.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("area deficit is small in the sigma to zero limit") {
  EllipsoidDomain disk{2, 1, 1};
  double d = area_deficit(disk, 1e-6, -0.2, 65);
  CHECK(std::abs(d) <= 1e-3);
}
