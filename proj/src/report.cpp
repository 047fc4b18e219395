#include "vfm/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

namespace vfm {

namespace {

// Last development (train or validation) time per well.
std::map<std::string, double> dev_end_times(const AssetDataset& data) {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto label = data.split(i);
    if (label == SplitLabel::Train || label == SplitLabel::Validation) {
      const auto& o = data.obs(i);
      auto [it, inserted] = out.try_emplace(o.well_id, o.t);
      if (!inserted) it->second = std::max(it->second, o.t);
    }
  }
  return out;
}

void write_summary_row(std::ofstream& os, const std::string& prefix,
                       const PercentileSummary& s) {
  os << prefix << ',' << s.mean << ',' << s.p05 << ',' << s.p25 << ','
     << s.p50 << ',' << s.p75 << ',' << s.p95 << "\n";
}

}  // namespace

double EvaluationReport::mean_trimmed_mape(const std::string& model) const {
  const auto& ws = wells.at(model);
  if (ws.empty()) throw EmptyErrors();
  double sum = 0;
  for (const auto& w : ws) sum += w.trimmed_mape;
  return sum / static_cast<double>(ws.size());
}

EvaluationReport evaluate_models(const AssetDataset& data,
                                 const std::vector<EvalModel>& models) {
  EvaluationReport report;
  const auto dev_end = dev_end_times(data);

  for (const auto& m : models) {
    report.model_names.push_back(m.name);
    std::vector<PointRecord> points;
    std::map<std::string, std::vector<double>> well_errors;
    std::map<std::string, std::vector<int>> well_sens;

    for (const auto& well_id : data.well_ids()) {
      const auto test_idx = data.well_indices_with(well_id, SplitLabel::Test);
      if (test_idx.empty()) continue;
      std::vector<WellObservation> obs;
      for (std::size_t i : test_idx) obs.push_back(data.obs(i));
      const auto sens = sensitivity_points(m.predict, obs);
      const double t_end = dev_end.count(well_id) ? dev_end.at(well_id) : 0.0;
      for (std::size_t k = 0; k < obs.size(); ++k) {
        PointRecord r;
        r.well_id = well_id;
        r.asset_id = obs[k].asset_id;
        r.t = obs[k].t;
        r.weeks_since_train = (obs[k].t - t_end) / 7.0;
        r.error = percentage_error(m.predict(obs[k]), obs[k].total_rate());
        r.sensitivity = sens[k];
        points.push_back(r);
        well_errors[well_id].push_back(r.error);
        well_sens[well_id].push_back(sens[k]);
      }
    }

    std::vector<WellRecord> wells;
    std::vector<double> mapes, rmses, abs_all;
    std::map<std::string, std::vector<double>> asset_mapes;
    double sens_sum = 0;
    for (const auto& [well_id, errors] : well_errors) {
      WellRecord w;
      w.well_id = well_id;
      w.asset_id = data.asset_of(well_id);
      w.n_points = errors.size();
      w.trimmed_mape = trimmed_mape(errors);
      w.trimmed_rmse = trimmed_rmse(errors);
      double s = 0;
      for (int v : well_sens[well_id]) s += v;
      w.sensitivity = s / static_cast<double>(well_sens[well_id].size());
      sens_sum += w.sensitivity;
      wells.push_back(w);
      mapes.push_back(w.trimmed_mape);
      rmses.push_back(w.trimmed_rmse);
      asset_mapes[w.asset_id].push_back(w.trimmed_mape);
    }
    for (const auto& p : points) abs_all.push_back(std::abs(p.error));

    report.points[m.name] = std::move(points);
    report.wells[m.name] = wells;
    if (!abs_all.empty()) report.overall_abs_error[m.name] = summarize(abs_all);
    if (!mapes.empty()) {
      report.well_mape_summary[m.name] = summarize(mapes);
      report.well_rmse_summary[m.name] = summarize(rmses);
      report.mean_sensitivity[m.name] = sens_sum / static_cast<double>(wells.size());
    }
    for (const auto& [asset, values] : asset_mapes) {
      double sum = 0;
      for (double v : values) sum += v;
      report.asset_mape[m.name][asset] = sum / static_cast<double>(values.size());
    }

    std::map<int, std::vector<double>> weekly;
    for (const auto& p : report.points[m.name]) {
      weekly[static_cast<int>(std::floor(p.weeks_since_train))].push_back(
          std::abs(p.error));
    }
    for (const auto& [week, values] : weekly) {
      report.weekly_abs_error[m.name][week] = summarize(values);
    }
  }
  return report;
}

void write_report(const EvaluationReport& report,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  {
    std::ofstream os(dir / "table1_overall_abs_error.csv");
    os << "model,mean,p05,p25,p50,p75,p95\n";
    for (const auto& m : report.model_names) {
      if (report.overall_abs_error.count(m)) {
        write_summary_row(os, m, report.overall_abs_error.at(m));
      }
    }
  }
  {
    std::ofstream os(dir / "table2_well_error_summary.csv");
    os << "metric,model,mean,p05,p25,p50,p75,p95\n";
    for (const auto& m : report.model_names) {
      if (report.well_mape_summary.count(m)) {
        write_summary_row(os, "trimmed_mape," + m, report.well_mape_summary.at(m));
      }
    }
    for (const auto& m : report.model_names) {
      if (report.well_rmse_summary.count(m)) {
        write_summary_row(os, "trimmed_rmse," + m, report.well_rmse_summary.at(m));
      }
    }
  }
  {
    std::ofstream os(dir / "table3_asset_mape.csv");
    os << "model,asset,mean_trimmed_mape\n";
    for (const auto& m : report.model_names) {
      if (!report.asset_mape.count(m)) continue;
      for (const auto& [asset, v] : report.asset_mape.at(m)) {
        os << m << ',' << asset << ',' << v << "\n";
      }
    }
  }
  {
    std::ofstream os(dir / "table4_sensitivity.csv");
    os << "model,mean_sensitivity_error\n";
    for (const auto& m : report.model_names) {
      if (report.mean_sensitivity.count(m)) {
        os << m << ',' << report.mean_sensitivity.at(m) << "\n";
      }
    }
  }
  {
    std::ofstream os(dir / "wells.csv");
    os << "model,well_id,asset_id,n_points,trimmed_mape,trimmed_rmse,sensitivity\n";
    for (const auto& m : report.model_names) {
      if (!report.wells.count(m)) continue;
      for (const auto& w : report.wells.at(m)) {
        os << m << ',' << w.well_id << ',' << w.asset_id << ',' << w.n_points
           << ',' << w.trimmed_mape << ',' << w.trimmed_rmse << ','
           << w.sensitivity << "\n";
      }
    }
  }
  {
    std::ofstream os(dir / "points.csv");
    os << "model,well_id,asset_id,t_days,weeks_since_train,error_pct,sensitivity\n";
    for (const auto& m : report.model_names) {
      if (!report.points.count(m)) continue;
      for (const auto& p : report.points.at(m)) {
        os << m << ',' << p.well_id << ',' << p.asset_id << ',' << p.t << ','
           << p.weeks_since_train << ',' << p.error << ',' << p.sensitivity
           << "\n";
      }
    }
  }

  nlohmann::json manifest;
  manifest["models"] = report.model_names;
  for (const auto& [k, v] : report.metadata) manifest["metadata"][k] = v;
  for (const auto& m : report.model_names) {
    if (report.wells.count(m) && !report.wells.at(m).empty()) {
      manifest["mean_trimmed_mape"][m] = report.mean_trimmed_mape(m);
    }
    if (report.mean_sensitivity.count(m)) {
      manifest["mean_sensitivity"][m] = report.mean_sensitivity.at(m);
    }
  }
  std::ofstream os(dir / "summary.json");
  os << manifest.dump(2) << "\n";
}

void emit_plot_data(const AssetDataset& data, const EvaluationReport& report,
                    const std::filesystem::path& dir, const MtlModel* universal,
                    const Scaler* universal_scaler) {
  std::filesystem::create_directories(dir);

  {  // choke opening vs upstream pressure, coloured by time
    std::ofstream os(dir / "fig3_choke_vs_pressure.csv");
    os << "well_id,t_days,choke,p1_bar\n";
    for (const auto& o : data.observations()) {
      os << o.well_id << ',' << o.t << ',' << o.u << ',' << o.p1 << "\n";
    }
  }
  {  // per-well p1 quartiles for boxplots
    std::ofstream os(dir / "fig4_pressure_boxplot.csv");
    os << "well_id,asset_id,p1_min,p1_p25,p1_p50,p1_p75,p1_max\n";
    for (const auto& [well_id, idx] : data.wells()) {
      std::vector<double> p1;
      for (std::size_t i : idx) p1.push_back(data.obs(i).p1);
      os << well_id << ',' << data.asset_of(well_id) << ','
         << *std::min_element(p1.begin(), p1.end()) << ','
         << percentile(p1, 25) << ',' << percentile(p1, 50) << ','
         << percentile(p1, 75) << ','
         << *std::max_element(p1.begin(), p1.end()) << "\n";
    }
  }
  {  // split timeline
    std::ofstream os(dir / "fig5_split_timeline.csv");
    os << "well_id,asset_id,t_days,split\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& o = data.obs(i);
      os << o.well_id << ',' << o.asset_id << ',' << o.t << ','
         << to_string(data.split(i)) << "\n";
    }
  }
  {  // error vs weeks since last training point
    std::ofstream os(dir / "fig6_error_vs_weeks.csv");
    os << "model,week,mean,p05,p25,p50,p75,p95\n";
    for (const auto& m : report.model_names) {
      if (!report.weekly_abs_error.count(m)) continue;
      for (const auto& [week, s] : report.weekly_abs_error.at(m)) {
        write_summary_row(os, m + ',' + std::to_string(week), s);
      }
    }
  }

  if (universal && universal_scaler) {
    // p1 sensitivity sweeps around the first test point of each well
    std::ofstream os(dir / "fig7_p1_sweeps.csv");
    os << "well_id,p1_bar,prediction\n";
    for (const auto& well_id : data.well_ids()) {
      if (!universal->has_well(well_id)) continue;
      const auto test_idx = data.well_indices_with(well_id, SplitLabel::Test);
      if (test_idx.empty()) continue;
      const auto& base = data.obs(test_idx.front());
      for (int k = -10; k <= 10; ++k) {
        WellObservation o = base;
        o.p1 += static_cast<double>(k);
        Eigen::MatrixXd x(6, 1);
        x(0, 0) = universal_scaler->u.apply(o.u);
        x(1, 0) = universal_scaler->p1.apply(o.p1);
        x(2, 0) = universal_scaler->p2.apply(o.p2);
        x(3, 0) = universal_scaler->T.apply(o.T);
        x(4, 0) = o.phi_g;
        x(5, 0) = o.phi_o;
        const double q = universal_scaler->Q.invert(
            universal->predict(x, well_id)(0));
        os << well_id << ',' << o.p1 << ',' << q << "\n";
      }
    }
  }

  if (universal && universal->spec().m_beta >= 1) {
    {  // identified task parameters
      std::ofstream os(dir / "fig8_beta_scatter.csv");
      os << "well_id,asset_id,beta1,beta2\n";
      for (const auto& well_id : universal->well_ids()) {
        const auto& b = universal->beta(well_id).data();
        os << well_id << ',' << data.asset_of(well_id) << ',' << b(0, 0) << ','
           << (b.rows() > 1 ? b(1, 0) : 0.0) << "\n";
      }
    }
    if (universal_scaler) {
      // response curves sweeping the adjusted choke at fixed beta grids
      std::ofstream os(dir / "fig9_beta_response.csv");
      os << "beta1,beta2,psi,prediction\n";
      // fixed operating point: median scaled features of the dataset
      std::vector<std::size_t> all(data.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      const Eigen::MatrixXd feats = feature_matrix(data, *universal_scaler, all);
      Eigen::VectorXd med(6);
      for (Eigen::Index r = 0; r < 6; ++r) {
        std::vector<double> row(feats.row(r).begin(), feats.row(r).end());
        med(r) = percentile(row, 50);
      }
      ModelSpec probe_spec = universal->spec();
      const std::vector<double> beta1_grid = {-0.1, -0.05, 0.0, 0.05, 0.1};
      const std::vector<double> beta2_grid = {-0.1, 0.0, 0.1};
      for (double b2 : beta2_grid) {
        for (double b1 : beta1_grid) {
          for (int s = 0; s <= 16; ++s) {
            const double psi = 0.1 + 0.05 * s;  // 0.1 .. 0.9
            Eigen::MatrixXd z(probe_spec.input_dim(), 1);
            z(0, 0) = psi;
            z.block(1, 0, 5, 1) = med.tail(5);
            if (probe_spec.m_beta >= 1) z(6, 0) = b1;
            if (probe_spec.m_beta >= 2) z(7, 0) = b2;
            for (int extra = 2; extra < probe_spec.m_beta; ++extra) {
              z(6 + extra, 0) = 0.0;
            }
            const double q = universal_scaler->Q.invert(
                universal->net().forward(ad::Value::constant(z)).data()(0, 0));
            os << b1 << ',' << b2 << ',' << psi << ',' << q << "\n";
          }
        }
      }
    }
  }
}

}  // namespace vfm
