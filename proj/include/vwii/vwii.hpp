#pragma once

#include "vwii/error.hpp"
#include "vwii/feature_model.hpp"
#include "vwii/bovw.hpp"
#include "vwii/cluster_builder.hpp"
#include "vwii/vwii_index.hpp"
#include "vwii/search.hpp"
#include "vwii/feature_file.hpp"
#include "vwii/manifest.hpp"
#include "vwii/pipeline.hpp"
