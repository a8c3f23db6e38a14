#include "spe/ecs.hpp"

namespace spe {

namespace {

Message msg(std::string from, std::string to, std::string op) {
  return Message{std::move(from), std::move(to), std::move(op), false};
}

Interface iface(std::string id, std::vector<std::string> ops) {
  Interface i{id, id, {}};
  for (auto& op : ops) i.operations.push_back({op, op});
  return i;
}

}  // namespace

SoftwareModel ecs_model(const EcsDemands& d) {
  SoftwareModel m;
  m.version = 1;

  m.interfaces = {
      iface("IUserController", {"registerCustomer", "purchase"}),
      iface("ICatalogController", {"browseCatalog"}),
      iface("IProductCatalog", {"searchProducts", "getProductDetails", "reserveProduct"}),
      iface("IDatabase", {"checkUsername", "insertCustomer", "insertAddress", "insertCredentials",
                          "insertPreferences", "insertPaymentData", "loadCatalogData", "updateStock",
                          "storeOrder", "chargePayment"}),
  };

  Component customer{"Customer", "Customer", {}, {"ICatalogController", "IUserController"}};
  customer.client = true;
  Component database{"Database", "Database", {"IDatabase"}, {}};
  database.frozen = true;
  database.requestOverhead = d.databaseRequestOverhead;
  m.components = {
      customer,
      {"UserController", "UserController", {"IUserController"}, {"IDatabase", "IProductCatalog"}},
      {"CatalogController", "CatalogController", {"ICatalogController"}, {"IProductCatalog"}},
      {"ProductCatalog", "ProductCatalog", {"IProductCatalog"}, {"IDatabase"}},
      database,
  };

  m.workloads = {
      {"Register", "Register", 50, 15.0},
      {"BrowseCatalog", "BrowseCatalog", 300, 15.0},
      {"MakePurchase", "MakePurchase", 150, 15.0},
  };

  // Register issues one fine-grained Database request per registration item.
  m.scenarios.push_back(Scenario{"Register", "Register", "Register",
                                 {
                                     msg("Customer", "UserController", "registerCustomer"),
                                     msg("UserController", "Database", "checkUsername"),
                                     msg("UserController", "Database", "insertCustomer"),
                                     msg("UserController", "Database", "insertAddress"),
                                     msg("UserController", "Database", "insertCredentials"),
                                     msg("UserController", "Database", "insertPreferences"),
                                     msg("UserController", "Database", "insertPaymentData"),
                                 }});
  m.scenarios.push_back(Scenario{"BrowseCatalog", "BrowseCatalog", "BrowseCatalog",
                                 {
                                     msg("Customer", "CatalogController", "browseCatalog"),
                                     msg("CatalogController", "ProductCatalog", "searchProducts"),
                                     msg("ProductCatalog", "Database", "loadCatalogData"),
                                     Loop{2.0, {msg("CatalogController", "ProductCatalog", "getProductDetails")}},
                                 }});
  m.scenarios.push_back(Scenario{"MakePurchase", "MakePurchase", "MakePurchase",
                                 {
                                     msg("Customer", "UserController", "purchase"),
                                     msg("UserController", "ProductCatalog", "reserveProduct"),
                                     msg("ProductCatalog", "Database", "updateStock"),
                                     msg("UserController", "Database", "storeOrder"),
                                     msg("UserController", "Database", "chargePayment"),
                                 }});

  m.demands = {
      {"UserController", "registerCustomer", d.registerCustomer},
      {"UserController", "purchase", d.purchase},
      {"CatalogController", "browseCatalog", d.browseCatalog},
      {"ProductCatalog", "searchProducts", d.searchProducts},
      {"ProductCatalog", "getProductDetails", d.getProductDetails},
      {"ProductCatalog", "reserveProduct", d.reserveProduct},
      {"Database", "checkUsername", d.checkUsername},
      {"Database", "insertCustomer", d.insertCustomer},
      {"Database", "insertAddress", d.insertAddress},
      {"Database", "insertCredentials", d.insertCredentials},
      {"Database", "insertPreferences", d.insertPreferences},
      {"Database", "insertPaymentData", d.insertPaymentData},
      {"Database", "loadCatalogData", d.loadCatalogData},
      {"Database", "updateStock", d.updateStock},
      {"Database", "storeOrder", d.storeOrder},
      {"Database", "chargePayment", d.chargePayment},
  };

  m.requirements = {
      ResponseTimeRequirement{"R1.BrowseCatalog", "BrowseCatalog", 4.0},
      ResponseTimeRequirement{"R1.MakePurchase", "MakePurchase", 4.0},
      ResponseTimeRequirement{"R1.Register", "Register", 4.0},
      UtilizationRequirement{"R2", 0.9},
  };

  canonicalize(m);
  return m;
}

}  // namespace spe
