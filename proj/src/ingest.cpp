#include "mobiscope/ingest.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "mobiscope/csv.hpp"
#include "mobiscope/error.hpp"

namespace mobiscope {

namespace {

void check_header(const csv::Reader& r, const std::vector<std::string>& expected) {
  if (r.header() != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw Error(Errc::ParseError, r.path().string() + ":1: header must be '" + want + "'");
  }
}

/// Shared row loop: enforces strictly increasing corrected timestamps.
template <typename V, typename RowFn>
SampleSeries<V> read_rows(const std::filesystem::path& path, const std::vector<std::string>& header,
                          std::int64_t offset_us, RowFn&& parse_row) {
  csv::Reader r(path);
  check_header(r, header);
  std::vector<Timestamp> ts;
  std::vector<V> vs;
  while (r.next()) {
    r.expect_width(header.size());
    const Timestamp t{r.int64_at(0) + offset_us};
    if (!ts.empty() && t <= ts.back()) {
      throw Error(Errc::StreamOrderError,
                  path.string() + ":" + std::to_string(r.line()) + ": timestamp not strictly increasing");
    }
    vs.push_back(parse_row(r));
    ts.push_back(t);
  }
  return SampleSeries<V>(std::move(ts), std::move(vs));
}

std::filesystem::path legend_path(const std::filesystem::path& index_dir, const std::string& legend_id) {
  return index_dir / ("legend_" + legend_id + ".csv");
}

std::map<int, std::string> read_legend(const std::filesystem::path& path) {
  csv::Reader r(path);
  check_header(r, {"id", "class_name"});
  std::map<int, std::string> legend;
  while (r.next()) {
    r.expect_width(2);
    const auto id = r.int64_at(0);
    if (!legend.emplace(static_cast<int>(id), std::string(r.fields()[1])).second) r.fail("duplicate legend id");
  }
  return legend;
}

void read_grid(const std::filesystem::path& path, LabelRaster& raster) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read raster grid " + path.string());
  long w = 0;
  long h = 0;
  if (!(in >> w >> h) || w <= 0 || h <= 0) {
    throw Error(Errc::ParseError, path.string() + ":1: expected positive 'W H' header");
  }
  raster.width = static_cast<int>(w);
  raster.height = static_cast<int>(h);
  raster.classes.resize(static_cast<std::size_t>(w * h));
  for (auto& c : raster.classes) {
    if (!(in >> c)) throw Error(Errc::ParseError, path.string() + ": expected " + std::to_string(w * h) + " class ids");
  }
  std::string extra;
  if (in >> extra) throw Error(Errc::ParseError, path.string() + ": trailing data after grid");
}

}  // namespace

std::vector<std::string> stream_header(StreamKind kind, std::size_t dim) {
  switch (kind) {
    case StreamKind::gps: return {"t_us", "lat_deg", "lon_deg", "h_acc_m"};
    case StreamKind::slam_pose: return {"t_us", "x_m", "y_m", "z_m", "qx", "qy", "qz", "qw"};
    case StreamKind::gaze: return {"t_us", "gx_norm", "gy_norm", "confidence"};
    case StreamKind::head_flow: return {"t_us", "du_norm", "dv_norm"};
    case StreamKind::eda: return {"t_us", "eda_us"};
    case StreamKind::ibi: return {"t_us", "ibi_ms"};
    case StreamKind::imu_foot_left:
    case StreamKind::imu_foot_right: return {"t_us", "ax", "ay", "az", "gx", "gy", "gz"};
    case StreamKind::skeleton: return {"t_us", "joint_name", "px", "py", "confidence"};
    case StreamKind::walkway_edges: return {"t_us", "left_px", "right_px", "foot_row_px"};
    case StreamKind::material_embedding: {
      std::vector<std::string> h{"t_us"};
      for (std::size_t i = 0; i < dim; ++i) h.push_back("e" + std::to_string(i));
      return h;
    }
    case StreamKind::label_raster: return {"t_us", "grid_path", "legend_id"};
  }
  return {};
}

SampleSeries<GpsFix> read_gps(const std::filesystem::path& path, std::int64_t offset_us) {
  return read_rows<GpsFix>(path, stream_header(StreamKind::gps), offset_us, [](const csv::Reader& r) {
    GpsFix f{r.double_at(1), r.double_at(2), r.double_at(3)};
    if (f.lat_deg < -90.0 || f.lat_deg > 90.0) r.fail("latitude out of [-90, 90]");
    if (f.lon_deg < -180.0 || f.lon_deg > 180.0) r.fail("longitude out of [-180, 180]");
    if (!(f.h_acc_m > 0.0)) r.fail("h_acc_m must be positive");
    return f;
  });
}

SampleSeries<SlamPose> read_slam_poses(const std::filesystem::path& path, std::int64_t offset_us) {
  return read_rows<SlamPose>(path, stream_header(StreamKind::slam_pose), offset_us, [](const csv::Reader& r) {
    SlamPose p;
    p.position = {r.double_at(1), r.double_at(2), r.double_at(3)};
    p.orientation = Eigen::Quaterniond(r.double_at(7), r.double_at(4), r.double_at(5), r.double_at(6));
    if (std::abs(p.orientation.norm() - 1.0) > 1e-6) r.fail("quaternion is not unit norm");
    return p;
  });
}

SampleSeries<GazeSample> read_gaze(const std::filesystem::path& path, std::int64_t offset_us) {
  return read_rows<GazeSample>(path, stream_header(StreamKind::gaze), offset_us, [](const csv::Reader& r) {
    GazeSample g{r.double_at(1), r.double_at(2), r.double_at(3)};
    if (g.gx < 0.0 || g.gx > 1.0 || g.gy < 0.0 || g.gy > 1.0) r.fail("gaze coordinate outside [0,1]");
    if (g.confidence < 0.0 || g.confidence > 1.0) r.fail("confidence outside [0,1]");
    return g;
  });
}

SampleSeries<HeadFlow> read_head_flow(const std::filesystem::path& path, std::int64_t offset_us) {
  return read_rows<HeadFlow>(path, stream_header(StreamKind::head_flow), offset_us,
                             [](const csv::Reader& r) { return HeadFlow{r.double_at(1), r.double_at(2)}; });
}

SampleSeries<double> read_eda(const std::filesystem::path& path, std::int64_t offset_us) {
  return read_rows<double>(path, stream_header(StreamKind::eda), offset_us, [](const csv::Reader& r) {
    const double v = r.double_at(1);
    if (v < 0.0) r.fail("negative skin conductance");
    return v;
  });
}

SampleSeries<double> read_ibi(const std::filesystem::path& path, std::int64_t offset_us) {
  return read_rows<double>(path, stream_header(StreamKind::ibi), offset_us, [](const csv::Reader& r) {
    const double v = r.double_at(1);
    if (!(v > 0.0)) r.fail("inter-beat interval must be positive");
    return v;
  });
}

SampleSeries<ImuSample> read_imu(const std::filesystem::path& path, std::int64_t offset_us) {
  return read_rows<ImuSample>(path, stream_header(StreamKind::imu_foot_left), offset_us, [](const csv::Reader& r) {
    ImuSample s;
    s.accel = {r.double_at(1), r.double_at(2), r.double_at(3)};
    s.gyro = {r.double_at(4), r.double_at(5), r.double_at(6)};
    return s;
  });
}

SampleSeries<SkeletonFrame> read_skeleton(const std::filesystem::path& path, std::int64_t offset_us) {
  csv::Reader r(path);
  const auto header = stream_header(StreamKind::skeleton);
  check_header(r, header);
  std::vector<Timestamp> ts;
  std::vector<SkeletonFrame> frames;
  while (r.next()) {
    r.expect_width(header.size());
    const Timestamp t{r.int64_at(0) + offset_us};
    if (ts.empty() || t > ts.back()) {
      ts.push_back(t);
      frames.emplace_back();
    } else if (t < ts.back()) {
      throw Error(Errc::StreamOrderError,
                  path.string() + ":" + std::to_string(r.line()) + ": timestamp decreases");
    }
    const std::string joint(r.fields()[1]);
    if (joint.empty()) r.fail("empty joint name");
    Keypoint k{r.double_at(2), r.double_at(3), r.double_at(4)};
    if (!frames.back().joints.emplace(joint, k).second) r.fail("joint '" + joint + "' repeated within a frame");
  }
  return SampleSeries<SkeletonFrame>(std::move(ts), std::move(frames));
}

SampleSeries<WalkwayEdges> read_walkway_edges(const std::filesystem::path& path, std::int64_t offset_us) {
  return read_rows<WalkwayEdges>(path, stream_header(StreamKind::walkway_edges), offset_us,
                                 [](const csv::Reader& r) {
                                   return WalkwayEdges{r.double_at(1), r.double_at(2), r.double_at(3)};
                                 });
}

SampleSeries<Embedding> read_material_embeddings(const std::filesystem::path& path, std::int64_t offset_us) {
  std::size_t dim = 0;
  {
    csv::Reader probe(path);
    if (probe.header().size() < 2) {
      throw Error(Errc::ParseError, path.string() + ":1: embedding header needs at least one e column");
    }
    dim = probe.header().size() - 1;
  }
  return read_rows<Embedding>(path, stream_header(StreamKind::material_embedding, dim), offset_us,
                              [dim](const csv::Reader& r) {
                                Embedding e(static_cast<Eigen::Index>(dim));
                                for (std::size_t i = 0; i < dim; ++i) e[static_cast<Eigen::Index>(i)] = r.double_at(i + 1);
                                return e;
                              });
}

SampleSeries<LabelRaster> read_label_rasters(const std::filesystem::path& index_path, std::int64_t offset_us) {
  const auto dir = index_path.parent_path();
  std::map<std::string, std::map<int, std::string>> legends;
  return read_rows<LabelRaster>(
      index_path, stream_header(StreamKind::label_raster), offset_us, [&](const csv::Reader& r) {
        LabelRaster raster;
        raster.grid_path = std::string(r.fields()[1]);
        raster.legend_id = std::string(r.fields()[2]);
        if (raster.grid_path.empty()) r.fail("empty grid path");
        auto it = legends.find(raster.legend_id);
        if (it == legends.end()) {
          it = legends.emplace(raster.legend_id, read_legend(legend_path(dir, raster.legend_id))).first;
        }
        raster.legend = it->second;
        read_grid(dir / raster.grid_path, raster);
        for (int c : raster.classes) {
          if (!raster.legend.count(c)) r.fail("class id " + std::to_string(c) + " missing from legend");
        }
        return raster;
      });
}

StreamData parse_stream(const StreamDecl& decl, const std::filesystem::path& base_dir) {
  const auto path = base_dir / decl.path;
  const auto off = decl.clock_offset_us;
  switch (decl.kind) {
    case StreamKind::gps: return read_gps(path, off);
    case StreamKind::slam_pose: return read_slam_poses(path, off);
    case StreamKind::gaze: return read_gaze(path, off);
    case StreamKind::head_flow: return read_head_flow(path, off);
    case StreamKind::eda: return read_eda(path, off);
    case StreamKind::ibi: return read_ibi(path, off);
    case StreamKind::imu_foot_left:
    case StreamKind::imu_foot_right: return read_imu(path, off);
    case StreamKind::skeleton: return read_skeleton(path, off);
    case StreamKind::walkway_edges: return read_walkway_edges(path, off);
    case StreamKind::material_embedding: return read_material_embeddings(path, off);
    case StreamKind::label_raster: return read_label_rasters(path, off);
  }
  throw Error(Errc::ParseError, "unhandled stream kind");
}

void write_gps(const std::filesystem::path& path, const SampleSeries<GpsFix>& s) {
  csv::Writer w(path, stream_header(StreamKind::gps));
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& f = s.value(i);
    w.field(s.time(i).micros_utc).field(f.lat_deg).field(f.lon_deg).field(f.h_acc_m).end_row();
  }
}

void write_slam_poses(const std::filesystem::path& path, const SampleSeries<SlamPose>& s) {
  csv::Writer w(path, stream_header(StreamKind::slam_pose));
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& p = s.value(i);
    w.field(s.time(i).micros_utc).field(p.position.x()).field(p.position.y()).field(p.position.z());
    w.field(p.orientation.x()).field(p.orientation.y()).field(p.orientation.z()).field(p.orientation.w());
    w.end_row();
  }
}

void write_gaze(const std::filesystem::path& path, const SampleSeries<GazeSample>& s) {
  csv::Writer w(path, stream_header(StreamKind::gaze));
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& g = s.value(i);
    w.field(s.time(i).micros_utc).field(g.gx).field(g.gy).field(g.confidence).end_row();
  }
}

void write_head_flow(const std::filesystem::path& path, const SampleSeries<HeadFlow>& s) {
  csv::Writer w(path, stream_header(StreamKind::head_flow));
  for (std::size_t i = 0; i < s.size(); ++i) {
    w.field(s.time(i).micros_utc).field(s.value(i).du).field(s.value(i).dv).end_row();
  }
}

void write_eda(const std::filesystem::path& path, const SampleSeries<double>& s) {
  csv::Writer w(path, stream_header(StreamKind::eda));
  for (std::size_t i = 0; i < s.size(); ++i) w.field(s.time(i).micros_utc).field(s.value(i)).end_row();
}

void write_ibi(const std::filesystem::path& path, const SampleSeries<double>& s) {
  csv::Writer w(path, stream_header(StreamKind::ibi));
  for (std::size_t i = 0; i < s.size(); ++i) w.field(s.time(i).micros_utc).field(s.value(i)).end_row();
}

void write_imu(const std::filesystem::path& path, const SampleSeries<ImuSample>& s) {
  csv::Writer w(path, stream_header(StreamKind::imu_foot_left));
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& v = s.value(i);
    w.field(s.time(i).micros_utc);
    for (int k = 0; k < 3; ++k) w.field(v.accel[k]);
    for (int k = 0; k < 3; ++k) w.field(v.gyro[k]);
    w.end_row();
  }
}

void write_skeleton(const std::filesystem::path& path, const SampleSeries<SkeletonFrame>& s) {
  csv::Writer w(path, stream_header(StreamKind::skeleton));
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (const auto& [name, k] : s.value(i).joints) {
      w.field(s.time(i).micros_utc).field(std::string_view(name)).field(k.px).field(k.py).field(k.confidence);
      w.end_row();
    }
  }
}

void write_walkway_edges(const std::filesystem::path& path, const SampleSeries<WalkwayEdges>& s) {
  csv::Writer w(path, stream_header(StreamKind::walkway_edges));
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& e = s.value(i);
    w.field(s.time(i).micros_utc).field(e.left_px).field(e.right_px).field(e.foot_row_px).end_row();
  }
}

void write_material_embeddings(const std::filesystem::path& path, const SampleSeries<Embedding>& s) {
  const std::size_t dim = s.empty() ? 0 : static_cast<std::size_t>(s.value(0).size());
  csv::Writer w(path, stream_header(StreamKind::material_embedding, dim));
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (static_cast<std::size_t>(s.value(i).size()) != dim) throw Error(Errc::DimError, "ragged embedding series");
    w.field(s.time(i).micros_utc);
    for (double v : s.value(i)) w.field(v);
    w.end_row();
  }
}

void write_label_rasters(const std::filesystem::path& index_path, const SampleSeries<LabelRaster>& s) {
  const auto dir = index_path.parent_path();
  csv::Writer w(index_path, stream_header(StreamKind::label_raster));
  std::set<std::string> written_legends;
  std::set<std::string> written_grids;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& r = s.value(i);
    w.field(s.time(i).micros_utc).field(std::string_view(r.grid_path)).field(std::string_view(r.legend_id)).end_row();
    if (written_grids.insert(r.grid_path).second) {
      const auto grid = dir / r.grid_path;
      if (grid.has_parent_path()) std::filesystem::create_directories(grid.parent_path());
      std::ofstream out(grid);
      if (!out) throw Error(Errc::IoError, "cannot write " + grid.string());
      out << r.width << ' ' << r.height << '\n';
      for (int row = 0; row < r.height; ++row) {
        for (int col = 0; col < r.width; ++col) out << (col ? " " : "") << r.class_at(col, row);
        out << '\n';
      }
    }
    if (written_legends.insert(r.legend_id).second) {
      csv::Writer lw(legend_path(dir, r.legend_id), {"id", "class_name"});
      for (const auto& [id, name] : r.legend) lw.field(static_cast<std::int64_t>(id)).field(std::string_view(name)).end_row();
    }
  }
}

SampleSeries<double> resample_uniform(const SampleSeries<double>& series, double rate_hz) {
  if (series.size() < 2) throw Error(Errc::EmptyStream, "resampling needs at least two samples");
  if (!(rate_hz > 0.0)) throw Error(Errc::InvalidRange, "resample rate must be positive");
  const double step_us = 1e6 / rate_hz;
  const Timestamp first = series.front_time();
  const Timestamp last = series.back_time();
  std::vector<Timestamp> ts;
  std::vector<double> vs;
  std::size_t j = 0;
  for (std::int64_t k = 0;; ++k) {
    const Timestamp t = first + Duration{std::llround(static_cast<double>(k) * step_us)};
    if (t > last) break;
    while (j + 1 < series.size() && series.time(j + 1) < t) ++j;
    if (series.time(j) == t) {
      vs.push_back(series.value(j));
    } else if (j + 1 < series.size() && series.time(j + 1) == t) {
      vs.push_back(series.value(j + 1));
    } else {
      const double ta = static_cast<double>(series.time(j).micros_utc);
      const double tb = static_cast<double>(series.time(j + 1).micros_utc);
      const double a = (static_cast<double>(t.micros_utc) - ta) / (tb - ta);
      vs.push_back(series.value(j) + a * (series.value(j + 1) - series.value(j)));
    }
    if (!ts.empty() && t == ts.back()) {
      vs.pop_back();
      continue;
    }
    ts.push_back(t);
  }
  return SampleSeries<double>(std::move(ts), std::move(vs));
}

}  // namespace mobiscope
