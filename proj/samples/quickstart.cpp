// Prepare a dataset, print its split shapes and walk the training batches.
//
//   tsprep_sample <cache-root> [dataset]
//
// The dataset defaults to ArrowHead; raw files are downloaded on first use.

#include <iostream>

#include "tsprep/batching.hpp"
#include "tsprep/pipeline.hpp"

int main(int argc, char** argv) {
  using namespace tsprep;
  if (argc < 2) {
    std::cerr << "usage: " << argv[0] << " <cache-root> [dataset]\n";
    return 2;
  }
  try {
    PipelineConfig config;
    config.path = argv[1];
    config.dataset = DatasetId::parse(argc > 2 ? argv[2] : "ArrowHead");
    config.train_prop = 0.7;
    config.val_prop = 0.2;
    config.missing = MissingSpec(0.3);
    config.impute = ImputeMethod::parse("forward");
    config.mask = true;
    config.delta = true;
    config.standardise = true;
    config.seed = 42;

    const Dataset data = build(config);
    for (auto split : kAllSplits)
      std::cout << to_string(split) << ": X" << shape_string(data.X(split).tensor().shape()) << " y"
                << shape_string(data.y(split).shape()) << "\n";
    std::cout << "channels:";
    for (const auto& name : data.layout().names()) std::cout << ' ' << name;
    std::cout << "\n";

    std::size_t seen = 0;
    for (const Batch& batch : BatchLoader(data, Split::train, 32, {.shuffle = true, .seed = 42})) {
      const PackedBatch packed = pack(batch);
      seen += batch.size();
      std::cout << "batch of " << batch.size() << ", packed rows " << packed.values.dim(0) << "\n";
    }
    std::cout << seen << " training sequences\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
