#pragma once

#include "urnn/baselines.hpp"
#include "urnn/model.hpp"

namespace urnn {

class UrnnModel : public SequenceModel {
 public:
  UrnnModel(size_t n_in, size_t n_h, size_t n_o, uint64_t perm_seed);

  URNNParams& params() { return p_; }
  const URNNParams& params() const { return p_; }
  void set_nonlinearity(Nonlinearity nl) { nl_ = nl; }
  Nonlinearity nonlinearity() const { return nl_; }

  std::string kind() const override { return "urnn"; }
  size_t flat_size() const override;
  std::vector<TensorSpec> groups() const override;
  void to_flat(double* out) const override;
  void from_flat(const double* in) override;
  double batch_grad(const TaskBatch& tb, std::vector<double>& grad,
                    std::vector<double>* probe = nullptr) override;
  double evaluate(const TaskBatch& tb, double* metric) const override;
  void hidden_norms(const TaskBatch& tb, std::vector<double>& norms,
                    std::vector<double>& dist_to_final) const override;

 private:
  URNNParams p_;
  Nonlinearity nl_ = Nonlinearity::kModRelu;
  UrnnTape tape_;
  UrnnGrads scratch_;
};

class RnnModel : public SequenceModel {
 public:
  RnnModel(size_t n_in, size_t n_h, size_t n_o, RnnActivation act);

  RNNParams& params() { return p_; }

  std::string kind() const override {
    return p_.activation == RnnActivation::kTanh ? "rnn_tanh" : "irnn";
  }
  size_t flat_size() const override;
  std::vector<TensorSpec> groups() const override;
  void to_flat(double* out) const override;
  void from_flat(const double* in) override;
  double batch_grad(const TaskBatch& tb, std::vector<double>& grad,
                    std::vector<double>* probe = nullptr) override;
  double evaluate(const TaskBatch& tb, double* metric) const override;
  void hidden_norms(const TaskBatch& tb, std::vector<double>& norms,
                    std::vector<double>& dist_to_final) const override;

 private:
  RNNParams p_;
};

class LstmModel : public SequenceModel {
 public:
  LstmModel(size_t n_in, size_t n_h, size_t n_o);

  LSTMParams& params() { return p_; }

  std::string kind() const override { return "lstm"; }
  size_t flat_size() const override;
  std::vector<TensorSpec> groups() const override;
  void to_flat(double* out) const override;
  void from_flat(const double* in) override;
  double batch_grad(const TaskBatch& tb, std::vector<double>& grad,
                    std::vector<double>* probe = nullptr) override;
  double evaluate(const TaskBatch& tb, double* metric) const override;
  void hidden_norms(const TaskBatch& tb, std::vector<double>& norms,
                    std::vector<double>& dist_to_final) const override;

 private:
  LSTMParams p_;
};

}  // namespace urnn
