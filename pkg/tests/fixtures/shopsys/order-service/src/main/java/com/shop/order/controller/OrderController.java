package com.shop.order.controller;

import com.shop.order.dto.OrderDTO;
import com.shop.order.service.OrderService;
import java.util.List;
import org.springframework.web.bind.annotation.*;

@RestController
@RequestMapping("/api/v2/orders")
public class OrderController {

    private final OrderService orderService;

    public OrderController(OrderService orderService) {
        this.orderService = orderService;
    }

    @GetMapping
    public List<OrderDTO> list() {
        return orderService.listAll();
    }

    @PutMapping("/{id}")
    public void update(@PathVariable Long id, @RequestBody OrderDTO dto, @RequestParam String reason) {
        orderService.update(id, dto);
        this.orderService.listAll();
    }

    @RequestMapping(value = "/search", method = RequestMethod.GET)
    public List<OrderDTO> search(@RequestParam String q) {
        return orderService.search(q);
    }
}
