#pragma once

// Velocity-stress staggered-grid finite differences on the FD grid.
//
// Node layout for array index (i, j), with h1/h3 the grid steps:
//   u          at (i h1,       j h3)
//   v          at ((i+1/2) h1, (j+1/2) h3)
//   txx, tzz   at ((i+1/2) h1, j h3)        row j = 0 is the free surface
//   txz        at (i h1,       (j+1/2) h3)
// Material values of model cell (i, j) are registered at the u node.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "seisgn/grid.hpp"
#include "seisgn/model.hpp"

namespace seisgn {

struct TimeAxis {
  double dt = 0.0;
  std::size_t nt = 0;

  void validate() const;
  bool operator==(const TimeAxis&) const = default;
};

/// Number of steps needed to cover `duration` seconds at step `dt`.
TimeAxis make_time_axis(double duration, double dt);

struct SourceWavelet {
  double fc = 0.0;  // center frequency (Hz)
  double t0 = 0.0;  // delay (s)
  double amplitude = 1.0;

  /// Delay of one period, which puts the wavelet's support in t >= 0.
  static SourceWavelet centered(double fc, double amplitude = 1.0);
  void validate() const;
};

/// Ricker wavelet [1 - 2 pi^2 fc^2 (t-t0)^2] exp(-pi^2 fc^2 (t-t0)^2).
double ricker(double t, const SourceWavelet& w);

/// Largest stable step for the staggered scheme, scaled by `safety`.
double stable_dt(const ElasticModel& model, const GridGeometry& geometry, double safety = 1.0);
double stable_dt(double vp_max, const GridGeometry& geometry, double safety = 1.0);

struct Wavefield {
  Field2D u, v, txx, tzz, txz;

  Wavefield() = default;
  explicit Wavefield(const GridGeometry& g);

  bool all_finite() const;
  double max_abs() const;
  bool operator==(const Wavefield&) const = default;
};

/// Material coefficients sampled at the staggered node positions. Half-node
/// values are arithmetic means of the adjacent cell values (clamped at edges).
struct StaggeredMaterial {
  GridGeometry geometry;
  Field2D buoyancy_u;  // 1/rho at u nodes
  Field2D buoyancy_v;  // at v nodes
  Field2D lambda_n;    // at normal-stress nodes
  Field2D mu_n;
  Field2D mu_s;  // at shear-stress nodes
  Field2D vs;    // cell values, used by the absorbing boundaries
  Field2D vp;

  explicit StaggeredMaterial(const ElasticModel& model);
};

/// Interior velocity update from k-1/2 to k+1/2.
void step_velocity(Wavefield& w, const StaggeredMaterial& m, double dt);
/// Interior stress update from k to k+1 (including the free-surface row of txx).
void step_stress(Wavefield& w, const StaggeredMaterial& m, double dt);
/// One leapfrog step: step_velocity then step_stress. Boundaries are separate.
void step_wavefield(Wavefield& w, const StaggeredMaterial& m, double dt);

/// tzz = txz = 0 on the top row.
void apply_free_surface(Wavefield& w);

enum class BoundarySide { Bottom, Right };

/// One-way advection of boundary u (speed Vs) and v (speed Vp), upwind in
/// space and forward Euler in time.
void apply_absorbing(Wavefield& w, const StaggeredMaterial& m, double dt, BoundarySide side);

/// u = 0 and txz = 0 on the left column.
void apply_symmetry(Wavefield& w);

/// Index of the surface tzz / v column nearest to x; throws outside [0, length].
std::size_t surface_node(const GridGeometry& g, double x);

/// Adds amplitude * ricker(t) to tzz at the surface node nearest to x.
void inject_source(Wavefield& w, const GridGeometry& g, double x, double t, const SourceWavelet& wl);

/// Receiver traces of one shot: vertical particle velocity at the surface.
struct ShotRecord {
  std::size_t shot = 0;
  std::size_t nr = 0;
  std::size_t nt = 0;
  double dt = 0.0;
  std::vector<double> samples;  // receiver-major: samples[r * nt + k]

  ShotRecord() = default;
  ShotRecord(std::size_t shot_, std::size_t nr_, std::size_t nt_, double dt_)
      : shot(shot_), nr(nr_), nt(nt_), dt(dt_), samples(nr_ * nt_, 0.0) {}

  std::span<double> trace(std::size_t r) { return {samples.data() + r * nt, nt}; }
  std::span<const double> trace(std::size_t r) const { return {samples.data() + r * nt, nt}; }
  double max_abs() const;
  bool operator==(const ShotRecord&) const = default;
};

struct Survey {
  AcquisitionGeometry acquisition;
  SourceWavelet wavelet;
  TimeAxis time;
};

/// Point sources and receivers for the general time loop.
struct SourceTerm {
  std::size_t node = 0;  // surface tzz column
  double scale = 1.0;
};
struct ReceiverNode {
  std::size_t i = 0;  // v node
  std::size_t j = 0;
};
using StepObserver = std::function<void(std::size_t step, const Wavefield&)>;

/// Time loop from a zero initial state. Each step: inject, absorbing
/// boundaries, update interior velocities, update stresses, free surface and symmetry, then
/// sample v at the receivers. Returns receiver-major samples (nrec x nt).
std::vector<double> simulate(const StaggeredMaterial& material, std::span<const SourceTerm> sources,
                             const SourceWavelet& wavelet, const TimeAxis& time,
                             std::span<const ReceiverNode> receivers,
                             const StepObserver& observer = {});

ShotRecord run_shot(const ElasticModel& model, const Survey& survey, std::size_t shot);
ShotRecord run_shot(const StaggeredMaterial& material, const Survey& survey, std::size_t shot);

/// One record per source, in source order. Shots run concurrently.
std::vector<ShotRecord> run_survey(const ElasticModel& model, const Survey& survey);

}  // namespace seisgn
