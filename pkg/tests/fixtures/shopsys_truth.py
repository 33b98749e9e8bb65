"""Hand-counted expected metrics for the shopsys fixture.

Counted by reading the fixture sources, not by running the extractor.
codeSize was cross-checked with tests/oracles.loc_oracle.

Notes on the traps the fixture contains:
  * order-service/entitys/OrderEntity is annotated @Entity but its package
    segment is misspelled, so it is not an entity.
  * UserController.login (private) and ProductController.remove
    (package-private) carry mappings but are not APIs.
  * static fields (serialVersionUID) are not entity attributes, and
    BaseEntity fields are not inherited into the count.
  * src/test and target/ sources are ignored.
"""

TOTAL_BUSINESS = 4

EXPECTED = {
    "user-service": dict(
        infra_role="business", codeSize=99,
        entityNum=2, entityAttributeNum=5, aveEntityAttribute=2.5,
        controllerNum=1, interfaceNum=2, abstractClassNum=0, serviceClassNum=1, dtoClassNum=1,
        APINum=2, maxParamNum=2, APIVersionSet=frozenset({"v1"}), APIVersionNum=1,
        serviceImplCall={"UserService.find": 3, "UserService.save": 1}, serviceImplCallNum=4,
        serviceCall={}, maxServiceCall=0, serviceCallGate=0, serviceCallPer=0.0,
        serviceCalled={"order-service": 1, "product-service": 1},
        maxServiceCalled=1, serviceCalledGate=2, serviceCalledPer=0.5,
    ),
    "order-service": dict(
        infra_role="business", codeSize=126,
        entityNum=1, entityAttributeNum=2, aveEntityAttribute=2.0,
        controllerNum=1, interfaceNum=1, abstractClassNum=1, serviceClassNum=1, dtoClassNum=2,
        APINum=3, maxParamNum=3, APIVersionSet=frozenset({"v2"}), APIVersionNum=1,
        serviceImplCall={"OrderService.listAll": 2, "OrderService.update": 1, "OrderService.search": 1},
        serviceImplCallNum=4,
        serviceCall={"user-service": 1, "product-service": 2, "payment-service": 2},
        maxServiceCall=2, serviceCallGate=3, serviceCallPer=0.75,
        serviceCalled={"payment-service": 1},
        maxServiceCalled=1, serviceCalledGate=1, serviceCalledPer=0.25,
    ),
    "product-service": dict(
        infra_role="business", codeSize=71,
        entityNum=2, entityAttributeNum=6, aveEntityAttribute=3.0,
        controllerNum=1, interfaceNum=1, abstractClassNum=0, serviceClassNum=1, dtoClassNum=0,
        APINum=2, maxParamNum=1, APIVersionSet=frozenset(), APIVersionNum=0,
        serviceImplCall={"ProductServiceImpl.reserve": 2}, serviceImplCallNum=2,
        serviceCall={"user-service": 1}, maxServiceCall=1, serviceCallGate=1, serviceCallPer=0.25,
        serviceCalled={"order-service": 2}, maxServiceCalled=2, serviceCalledGate=1, serviceCalledPer=0.25,
    ),
    "payment-service": dict(
        infra_role="business", codeSize=70,
        entityNum=1, entityAttributeNum=3, aveEntityAttribute=3.0,
        controllerNum=2, interfaceNum=1, abstractClassNum=0, serviceClassNum=1, dtoClassNum=0,
        APINum=3, maxParamNum=4, APIVersionSet=frozenset({"v1", "v1.2"}), APIVersionNum=2,
        serviceImplCall={"PaymentService.charge": 1, "PaymentService.status": 1}, serviceImplCallNum=2,
        serviceCall={"order-service": 1}, maxServiceCall=1, serviceCallGate=1, serviceCallPer=0.25,
        serviceCalled={"order-service": 2}, maxServiceCalled=2, serviceCalledGate=1, serviceCalledPer=0.25,
    ),
}

REGISTRY = "shop-registry"
