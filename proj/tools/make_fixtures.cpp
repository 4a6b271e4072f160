// Regenerates the bundled synthetic fixtures under the given directory.

#include <filesystem>
#include <iostream>

#include "fsk/embedding_store.hpp"
#include "fsk/synthetic.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(dir);

  fsk::GaussianDatasetSpec pooled;
  pooled.name = "synthetic_pooled";
  pooled.seed = 11;
  fsk::save_dataset(fsk::make_gaussian_dataset(pooled), dir / "synthetic_pooled.fseb");

  fsk::GaussianDatasetSpec five;
  five.classes = 5;
  five.per_class = 30;
  five.shape = fsk::EmbeddingShape::pooled(16);
  five.seed = 12;
  const auto five_ds = fsk::make_gaussian_dataset(five);
  fsk::save_dataset(five_ds, dir / "five_class.fseb");
  fsk::save_csv(five_ds, dir / "five_class.csv");

  fsk::GaussianDatasetSpec grid;
  grid.classes = 6;
  grid.per_class = 25;
  grid.shape = fsk::EmbeddingShape::grid(3, 3, 16);
  grid.seed = 13;
  fsk::save_dataset(fsk::make_gaussian_dataset(grid), dir / "small_grid.fseb");

  fsk::GaussianDatasetSpec big_grid;
  big_grid.name = "synthetic_grid";
  big_grid.shape = fsk::EmbeddingShape::grid(5, 5, 64);
  big_grid.seed = 14;
  fsk::save_dataset(fsk::make_gaussian_dataset(big_grid), dir / "synthetic_grid.fseb");

  // Heavily overlapping classes, so heads disagree with the labels often.
  fsk::GaussianDatasetSpec overlap;
  overlap.name = "overlap_pooled";
  overlap.classes = 12;
  overlap.per_class = 30;
  overlap.separation = 0.4;
  overlap.seed = 15;
  fsk::save_dataset(fsk::make_gaussian_dataset(overlap), dir / "overlap_pooled.fseb");

  overlap.name = "overlap_grid";
  overlap.shape = fsk::EmbeddingShape::grid(5, 5, 64);
  overlap.separation = 0.6;
  overlap.seed = 16;
  fsk::save_dataset(fsk::make_gaussian_dataset(overlap), dir / "overlap_grid.fseb");

  std::cout << "fixtures written to " << dir << "\n";
  return 0;
}
