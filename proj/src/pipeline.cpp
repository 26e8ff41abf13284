#include "mobiscope/pipeline.hpp"

#include <future>
#include <sstream>

#include "mobiscope/csv.hpp"

namespace mobiscope {

using nlohmann::json;

namespace {

template <typename V>
const SampleSeries<V>* get(const StreamMap& streams, StreamKind kind) {
  auto it = streams.find(kind);
  if (it == streams.end()) return nullptr;
  return std::get_if<SampleSeries<V>>(&it->second);
}

template <typename V>
std::optional<TimeRange> range_of(const SampleSeries<V>* s) {
  if (s == nullptr || s->empty()) return std::nullopt;
  return TimeRange{s->front_time(), s->back_time()};
}

Duration ms(double v) { return Duration{std::llround(v * 1e3)}; }
Duration sec(double v) { return seconds_to_duration(v); }

void summarize(const StreamData& data, StreamSummary& out) {
  std::visit(
      [&](const auto& s) {
        out.samples = s.size();
        if (!s.empty()) {
          out.first = s.front_time();
          out.last = s.back_time();
        }
      },
      data);
}

}  // namespace

json ValidationReport::to_json() const {
  json streams_json = json::array();
  for (const auto& s : streams) {
    json j = {{"kind", std::string(to_string(s.kind))}, {"path", s.path}, {"samples", s.samples}};
    j["first"] = s.first ? json(s.first->micros_utc) : json(nullptr);
    j["last"] = s.last ? json(s.last->micros_utc) : json(nullptr);
    j["error"] = s.error ? json(*s.error) : json(nullptr);
    streams_json.push_back(std::move(j));
  }
  return {{"session_id", session_id}, {"ok", ok()}, {"streams", std::move(streams_json)}, {"errors", errors}};
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  os << "session " << (session_id.empty() ? "?" : session_id) << "\n";
  for (const auto& s : streams) {
    os << "  " << to_string(s.kind) << "  " << s.path << "  " << s.samples << " samples";
    if (s.first) os << "  [" << s.first->micros_utc << ", " << s.last->micros_utc << "]";
    if (s.error) os << "  ERROR";
    os << "\n";
  }
  for (const auto& e : errors) os << "error: " << e << "\n";
  os << (ok() ? "ok" : "invalid") << "\n";
  return os.str();
}

ValidationReport validate_session(const std::filesystem::path& manifest_path) {
  ValidationReport report;
  SessionManifest manifest;
  try {
    manifest = parse_manifest(manifest_path);
  } catch (const Error& e) {
    report.errors.push_back(e.describe());
    return report;
  }
  report.session_id = manifest.session_id;
  for (const auto& decl : manifest.streams) {
    StreamSummary s;
    s.kind = decl.kind;
    s.path = decl.path;
    try {
      summarize(parse_stream(decl, manifest.base_dir), s);
    } catch (const Error& e) {
      s.error = e.describe();
      report.errors.push_back(*s.error);
    }
    report.streams.push_back(std::move(s));
  }
  return report;
}

StreamMap load_streams(const SessionManifest& manifest) {
  std::vector<std::future<StreamData>> jobs;
  for (const auto& decl : manifest.streams) {
    jobs.push_back(std::async(std::launch::async, [&decl, &manifest] { return parse_stream(decl, manifest.base_dir); }));
  }
  StreamMap out;
  std::exception_ptr first_error;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      out.emplace(manifest.streams[i].kind, jobs[i].get());
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

SegmentSpec segment_spec_from(const Parameters& p) {
  std::ostringstream text;
  text << p.text("fusion.segment_mode") << ":" << csv::format_double(p.number("fusion.segment_length"));
  return parse_segment_spec(text.str(), p.number("fusion.min_fill"));
}

SessionBundle run_pipeline(const SessionManifest& manifest, const StreamMap& streams) {
  const Parameters& p = manifest.parameters;
  SessionBundle b;
  b.session_id = manifest.session_id;
  b.manifest = manifest.to_json();
  b.parameters = p.to_json();
  auto warn = [&](std::string msg) { b.warnings.push_back(std::move(msg)); };

  // Geo fusion.
  const auto* gps = get<GpsFix>(streams, StreamKind::gps);
  const auto* slam = get<SlamPose>(streams, StreamKind::slam_pose);
  if (gps == nullptr) throw Error(Errc::ManifestError, "a gps stream is required");
  if (slam == nullptr) throw Error(Errc::ManifestError, "a slam_pose stream is required");
  GeoParams gp;
  gp.gate.max_h_acc_m = p.number("geo.max_h_acc_m");
  gp.gate.max_speed_mps = p.number("geo.max_speed_mps");
  gp.pair_tol = ms(p.number("geo.pair_tol_ms"));
  gp.min_anchor_diag_m = p.number("geo.min_anchor_diag_m");
  gp.use_altitude = p.flag("geo.use_altitude");
  gp.piecewise = p.flag("geo.piecewise");
  gp.piecewise_window_anchors = static_cast<std::size_t>(p.number("geo.piecewise_window_anchors"));
  AlignmentResult al = align_session(*gps, *slam, gp);
  b.origin = al.origin;
  b.transform = al.global;
  b.piecewise = al.piecewise;
  b.anchor_residual_rms_m = al.anchor_residual_rms_m;
  b.n_anchors = al.pairs.size();
  b.n_rejected_fixes = al.selection.rejected.size();
  b.trajectory = std::move(al.trajectory);
  if (b.piecewise && b.piecewise->skipped_windows > 0) {
    warn("geo_fusion: " + std::to_string(b.piecewise->skipped_windows) + " piecewise windows skipped");
  }

  SegmentInputs in;

  // Gaze.
  const auto* gaze = get<GazeSample>(streams, StreamKind::gaze);
  const auto* flow = get<HeadFlow>(streams, StreamKind::head_flow);
  const auto* rasters = get<LabelRaster>(streams, StreamKind::label_raster);
  if (gaze == nullptr) {
    warn("gaze: stream missing, attention metrics absent");
  } else {
    IdtParams ip;
    ip.min_duration = ms(p.number("gaze.min_fix_duration_ms"));
    ip.theta_base = p.number("gaze.theta_base");
    ip.k_noise = p.number("gaze.k_noise");
    ip.noise_window = ms(p.number("gaze.noise_window_ms"));
    ip.min_confidence = p.number("gaze.min_confidence");
    SampleSeries<GazeSample> stabilized = *gaze;
    if (flow == nullptr) {
      warn("gaze: head_flow missing, fixations detected without head-motion compensation");
    } else {
      CompensatedGaze cg = compensate_head_motion(*gaze, *flow);
      if (cg.uncovered_count > 0) {
        warn("gaze: " + std::to_string(cg.uncovered_count) + " samples outside head_flow coverage left uncompensated");
      }
      stabilized = std::move(cg.gaze);
    }
    b.fixations = detect_fixations_idt(stabilized, ip);
    if (rasters == nullptr) {
      warn("gaze: label_raster missing, dwell by class absent");
    } else {
      const auto scene = flow ? project_to_scene(b.fixations, *flow) : b.fixations;
      IntersectionResult ir = intersect_fixations(scene, *rasters, ms(p.number("gaze.raster_tol_ms")));
      if (ir.unmatched > 0) warn("gaze: " + std::to_string(ir.unmatched) + " fixations without a raster in tolerance");
      if (ir.outside_frame > 0) warn("gaze: " + std::to_string(ir.outside_frame) + " fixations outside the frame");
      b.targets = std::move(ir.records);
    }
    if (!gaze->empty() && duration(*gaze).count() > 0) {
      b.attention = attention_metrics(b.fixations, b.targets, duration(*gaze));
    }
    in.gaze_range = range_of(gaze);
    in.fixations = b.fixations;
    in.targets = b.targets;
  }

  // Physiology.
  const auto* eda = get<double>(streams, StreamKind::eda);
  const auto* ibi = get<double>(streams, StreamKind::ibi);
  if (eda == nullptr) {
    warn("physio: eda stream missing, SCR metrics absent");
  } else {
    try {
      const auto uniform = resample_uniform(*eda, p.number("physio.eda_rate_hz"));
      const auto parts = decompose_eda(uniform, sec(p.number("physio.tonic_window_s")));
      ScrParams sp{p.number("physio.scr_min_amplitude_us"), sec(p.number("physio.scr_refractory_s"))};
      b.scr = detect_scr_peaks(parts.phasic, sp);
      b.eda_phasic = parts.phasic;
      in.eda_range = range_of(eda);
      in.scr = b.scr;
    } catch (const Error& e) {
      if (e.code() != Errc::WindowTooLong && e.code() != Errc::EmptyStream) throw;
      warn(e.describe());
    }
  }
  if (ibi == nullptr) {
    warn("physio: ibi stream missing, HRV metrics absent");
  } else {
    const auto filtered = filter_ibi(*ibi, p.number("physio.ibi_min_ms"), p.number("physio.ibi_max_ms"));
    if (filtered.dropped > 0) warn("physio: " + std::to_string(filtered.dropped) + " implausible IBIs dropped");
    b.physio_windows = physio_windows(filtered.kept, b.scr, sec(p.number("physio.window_s")),
                                      sec(p.number("physio.step_s")),
                                      static_cast<std::size_t>(p.number("physio.min_beats")));
    in.physio = b.physio_windows;
  }

  // Gait.
  const auto* imu_l = get<ImuSample>(streams, StreamKind::imu_foot_left);
  const auto* imu_r = get<ImuSample>(streams, StreamKind::imu_foot_right);
  GaitParams gpar;
  gpar.axis = gyro_axis_from_name(p.text("gait.axis"));
  gpar.omega_min = p.number("gait.omega_min");
  gpar.min_stride_gap = sec(p.number("gait.min_stride_gap_s"));
  gpar.min_rate_hz = p.number("gait.min_rate_hz");
  const Duration max_stride = sec(p.number("gait.max_stride_time_s"));
  if (imu_l) b.strides_left = detect_strides(*imu_l, Foot::left, gpar);
  if (imu_r) b.strides_right = detect_strides(*imu_r, Foot::right, gpar);
  if (!imu_l) warn("gait: imu_foot_left missing");
  if (!imu_r) warn("gait: imu_foot_right missing");
  if (imu_l || imu_r) {
    try {
      b.gait = gait_metrics(b.strides_left, b.strides_right, max_stride);
    } catch (const Error& e) {
      if (e.code() != Errc::InsufficientData) throw;
      warn(e.describe());
    }
    b.gait_windows = gait_windows(b.strides_left, b.strides_right, sec(p.number("gait.window_s")),
                                  sec(p.number("gait.step_s")), max_stride);
    auto rl = range_of(imu_l);
    auto rr = range_of(imu_r);
    if (rl && rr) {
      in.imu_range = TimeRange{std::min(rl->start, rr->start), std::max(rl->end, rr->end)};
    } else {
      in.imu_range = rl ? rl : rr;
    }
    in.strides = b.strides_left;
    in.strides.insert(in.strides.end(), b.strides_right.begin(), b.strides_right.end());
    in.gait = b.gait_windows;
  }

  // Walkway.
  const auto* skeleton = get<SkeletonFrame>(streams, StreamKind::skeleton);
  const auto* edges = get<WalkwayEdges>(streams, StreamKind::walkway_edges);
  if (skeleton == nullptr || edges == nullptr) {
    warn("walkway: skeleton or walkway_edges missing, width absent");
  } else {
    WalkwayParams wp;
    wp.stature_fraction = p.number("walkway.stature_fraction");
    wp.min_kp_conf = p.number("walkway.min_kp_conf");
    wp.min_skeleton_px = p.number("walkway.min_skeleton_px");
    wp.max_scale_age = sec(p.number("walkway.max_scale_age_s"));
    wp.head_joint = p.text("walkway.head_joint");
    wp.left_ankle_joint = p.text("walkway.left_ankle_joint");
    wp.right_ankle_joint = p.text("walkway.right_ankle_joint");
    auto ws = estimate_widths(*skeleton, *edges, manifest.participant.stature_m, wp);
    if (ws.skipped_frames > 0) warn("walkway: " + std::to_string(ws.skipped_frames) + " skeleton frames gave no scale");
    if (ws.unscaled_edges > 0) warn("walkway: " + std::to_string(ws.unscaled_edges) + " edge rows without a fresh scale");
    if (ws.rejected_edges > 0) warn("walkway: " + std::to_string(ws.rejected_edges) + " edge rows rejected");
    b.widths = std::move(ws.widths);
    in.width_range = range_of(edges);
    in.widths = b.widths;
  }
  const auto* embeddings = get<Embedding>(streams, StreamKind::material_embedding);
  const std::string probe = p.text("walkway.probe_model");
  if (embeddings == nullptr) {
    warn("walkway: material_embedding missing, material absent");
  } else if (probe.empty()) {
    warn("walkway: walkway.probe_model not set, material absent");
  } else {
    const auto model = load_probe_model(manifest.base_dir / probe);
    const auto window = static_cast<std::size_t>(p.number("walkway.smooth_window"));
    const auto labels = smooth_materials(classify_materials(*embeddings, model), window);
    for (std::size_t i = 0; i < labels.size(); ++i) b.materials.emplace_back(labels.time(i), labels.value(i));
    in.material_range = range_of(embeddings);
    in.materials = b.materials;
  }

  // Segments and hotspots.
  const SegmentSpec spec = segment_spec_from(p);
  b.segment_spec = to_string(spec);
  b.segments = build_segments(b.trajectory, spec);
  attach_metrics(b.segments, in);
  b.hotspots = hotspot_zscores(b.segments, split_list(p.text("fusion.hotspot_metrics")), p.number("fusion.z_thresh"),
                               p.number("fusion.min_coverage"));
  for (const auto& [metric, why] : b.hotspots.insufficient) warn("fusion: " + why);
  return b;
}

SessionBundle run_session(const SessionManifest& manifest) { return run_pipeline(manifest, load_streams(manifest)); }

json run_report(const SessionManifest& manifest, const SessionBundle& bundle) {
  return {{"format", "mobiscope-run-report/1"},
          {"session_id", manifest.session_id},
          {"parameters", manifest.parameters.to_json()},
          {"segment_spec", bundle.segment_spec},
          {"warnings", bundle.warnings},
          {"counts",
           {{"trajectory_points", bundle.trajectory.points.size()},
            {"anchors", bundle.n_anchors},
            {"fixations", bundle.fixations.size()},
            {"scr_peaks", bundle.scr.size()},
            {"strides_left", bundle.strides_left.size()},
            {"strides_right", bundle.strides_right.size()},
            {"segments", bundle.segments.size()}}}};
}

}  // namespace mobiscope
