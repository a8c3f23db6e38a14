#pragma once

#include "spe/model.hpp"

namespace spe {

/// Per-operation service times (seconds) of the E-Commerce System fixture.
/// The defaults are the calibrated values produced by tools/calibrate_ecs;
/// see data/README.md for the targets they satisfy.
struct EcsDemands {
  // UserController
  double registerCustomer = 0.012;
  double purchase = 0.018;
  // CatalogController
  double browseCatalog = 0.010;
  // ProductCatalog
  double searchProducts = 0.01519;
  double getProductDetails = 0.007595;
  double reserveProduct = 0.06592;
  // Database
  double checkUsername = 0.004622;
  double insertCustomer = 0.004622;
  double insertAddress = 0.004622;
  double insertCredentials = 0.004622;
  double insertPreferences = 0.004622;
  double insertPaymentData = 0.004622;
  double loadCatalogData = 0.01996;
  double updateStock = 0.0104;
  double storeOrder = 0.0104;
  double chargePayment = 0.0104;
  double databaseRequestOverhead = 0.005684;
};

/// E-Commerce System: client Customer; server components UserController,
/// CatalogController, ProductCatalog and Database (frozen COTS component);
/// scenarios Register (50 users), BrowseCatalog (300) and MakePurchase (150),
/// all with 15 s think time; requirements R1 (4 s server-side response per
/// service) and R2 (90 % utilization).
SoftwareModel ecs_model(const EcsDemands& demands = {});

}  // namespace spe
