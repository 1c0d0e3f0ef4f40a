#pragma once

#include "oodsim/error.hpp"
#include "oodsim/random.hpp"
#include "oodsim/text_io.hpp"
#include "oodsim/corpus.hpp"
#include "oodsim/embeddings.hpp"
#include "oodsim/metrics/cosine.hpp"
#include "oodsim/metrics/transport.hpp"
#include "oodsim/metrics/kmeans.hpp"
#include "oodsim/metrics/divergence.hpp"
#include "oodsim/metrics/mauve.hpp"
#include "oodsim/metrics/similarity.hpp"
#include "oodsim/similarity_report.hpp"
#include "oodsim/correlation/rank.hpp"
#include "oodsim/correlation/analysis.hpp"
#include "oodsim/pipeline/toml.hpp"
#include "oodsim/pipeline/config.hpp"
#include "oodsim/pipeline/heatmap.hpp"
#include "oodsim/pipeline/runner.hpp"
